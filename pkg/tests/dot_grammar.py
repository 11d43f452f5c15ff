"""DOT language grammar check (lark, LALR).

Transcribed from the abstract grammar published with Graphviz
(graphviz.org/doc/info/lang.html), minus HTML strings, which the emitter
never produces.  Keywords are case-insensitive; ``--`` is accepted only in
undirected graphs and ``->`` only in directed ones (checked after parsing).
"""
from lark import Lark, Token

DOT = r"""
graph: STRICT? GRAPHTYPE id? "{" stmt_list "}"
stmt_list: (stmt ";"?)*
?stmt: node_stmt | edge_stmt | attr_stmt | id "=" id -> assign | subgraph
attr_stmt: ATTRKIND attr_list
attr_list: ("[" a_list? "]")+
a_list: (id "=" id (";" | ",")?)+
edge_stmt: (node_id | subgraph) edge_rhs attr_list?
edge_rhs: (EDGEOP (node_id | subgraph))+
node_stmt: node_id attr_list?
node_id: id port?
port: ":" id (":" id)?
subgraph: (SUBGRAPH id?)? "{" stmt_list "}"
id: NAME | NUMERAL | STRING

STRICT.2: /strict\b/i
GRAPHTYPE.2: /(di)?graph\b/i
ATTRKIND.2: /(graph|node|edge)\b/i
SUBGRAPH.2: /subgraph\b/i
EDGEOP: "->" | "--"
NAME: /[A-Za-z_\x80-\uffff][A-Za-z_0-9\x80-\uffff]*/
NUMERAL: /-?(\.[0-9]+|[0-9]+(\.[0-9]*)?)/
STRING: /"(\\.|[^"\\])*"/

COMMENT: /\/\/[^\n]*/ | /\/\*(.|\n)*?\*\//
PREPROC: /^#[^\n]*/m
%import common.WS
%ignore WS
%ignore COMMENT
%ignore PREPROC
"""

_parser = Lark(DOT, start="graph", parser="lalr")


def check_dot(text: str) -> bool:
    """True iff ``text`` is a single well-formed DOT graph."""
    try:
        tree = _parser.parse(text)
    except Exception:
        return False
    directed = next(t for t in tree.children if isinstance(t, Token)
                    and t.type == "GRAPHTYPE").lower() == "digraph"
    want = "->" if directed else "--"
    return all(t == want for t in tree.scan_values(
        lambda v: isinstance(v, Token) and v.type == "EDGEOP"))
