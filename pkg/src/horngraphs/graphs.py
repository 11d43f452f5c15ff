"""Graph encodings of clause systems.

Three kinds of typed (hyper)graphs are built here:

* the constraint graph (CG): binary edges over a predicate layer, a clause
  layer and per-conjunct ASTs, built from clauses as written;
* the control- and data-flow hypergraph (CDHG): guarded ternary control-flow
  and data-flow hyperedges, built from a normalized system;
* a pruned graph with only relation symbols and their transitions.

Node ids are dense and follow construction order, so equal inputs always
give equal graphs.  Concrete names are kept for display only.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .chc import BoolConst, ClauseSystem, Comparison, IntConst, Var, print_term, term_vars
from .normalize import NormalizedSystem

__all__ = [
    "Node", "HornGraph", "NodeTypeCatalog", "LabelBundle", "GraphSizeError",
    "NODE_TYPES", "TASKS", "DATA_EDGE_VAR_TO_CA", "DEFAULT_NODE_CAP",
    "catalog", "build_cg", "build_cdhg", "build_pruned_rs_graph", "add_self_loops",
    "emit_dot", "emit_json", "read_json",
]

# global type vocabulary; the position is the integer encoding
NODE_TYPES = ("rs", "false", "rsa", "cla", "ch", "cb", "ca", "var", "op", "c", "initial", "guard")
TYPE_CODE = {t: i for i, t in enumerate(NODE_TYPES)}

_KIND_TYPES = {
    "CG": ("rs", "false", "rsa", "cla", "ch", "cb", "ca", "var", "op", "c"),
    "CDHG": ("rs", "initial", "false", "rsa", "var", "op", "c", "guard"),
    "PRUNED": ("rs", "false"),
}
_KIND_RELATIONS = {
    "CG": {r: 2 for r in ("RSA", "RSI", "AI", "CH", "CB", "CA", "GUARD", "DATA", "A_st")},
    "CDHG": {"CFHE": 3, "DFHE": 3, "Guard": 2, "RSA": 2, "A_l": 2, "A_r": 2},
    "PRUNED": {"TRANSITION": 2},
}
SELF = "SELF"

TASKS = ("T1", "T2", "T3", "T4a", "T4b", "T5a", "T5b")

# Ambiguous direction of DATA edges; var -> ca unless flipped here.
DATA_EDGE_VAR_TO_CA = True
DEFAULT_NODE_CAP = 10_000

_SHAPES = {
    "rs": "box", "false": "box", "cla": "box", "ch": "box", "cb": "box", "initial": "box",
    "rsa": "ellipse", "ca": "ellipse", "var": "ellipse",
    "op": "square", "guard": "square", "c": "box",
}


class GraphSizeError(RuntimeError):
    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"graph exceeds node cap of {cap}")


@dataclass(frozen=True)
class Node:
    id: int
    type: str
    name: str | None = None


@dataclass(frozen=True)
class NodeTypeCatalog:
    kind: str
    node_types: tuple
    relations: dict

    def type_index(self, t: str) -> int:
        return self.node_types.index(t)


def catalog(kind: str, self_loops: bool = True) -> NodeTypeCatalog:
    rels = dict(_KIND_RELATIONS[kind])
    if self_loops:
        rels[SELF] = 1
    return NodeTypeCatalog(kind, _KIND_TYPES[kind], rels)


@dataclass(frozen=True)
class LabelBundle:
    """Ground truth for one task.

    ``target_kind`` tells what the keys of ``values`` are: graph node ids
    (``"node"``), relation symbols (``"symbol"``), ``(symbol, position)``
    pairs (``"argument"``) or clause ids (``"clause"``).
    """

    task: str
    values: dict
    target_kind: str = "node"

    def on_graph(self, graph: "HornGraph") -> "LabelBundle":
        """The same labels keyed by the representative node ids of ``graph``."""
        if self.target_kind == "node":
            return self
        out = {}
        for key, v in self.values.items():
            if self.target_kind == "symbol":
                anchor = ("rs", key)
            elif self.target_kind == "argument":
                anchor = ("rsa", key[0], key[1])
            else:
                anchor = ("clause", key)
            if anchor not in graph.anchors:
                continue
            out[graph.anchors[anchor]] = v
        return LabelBundle(self.task, dict(sorted(out.items())), "node")


@dataclass(frozen=True)
class HornGraph:
    kind: str
    nodes: tuple
    relations: dict
    edges: dict
    anchors: dict = field(default_factory=dict, compare=False)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def type_histogram(self) -> dict[str, int]:
        hist: dict[str, int] = {}
        for n in self.nodes:
            hist[n.type] = hist.get(n.type, 0) + 1
        return hist

    def nodes_of_type(self, t: str) -> list[int]:
        return [n.id for n in self.nodes if n.type == t]

    def node_of(self, *anchor) -> int:
        return self.anchors[tuple(anchor)]

    def check(self) -> None:
        """Assert the structural invariants."""
        n = len(self.nodes)
        assert all(node.id == i for i, node in enumerate(self.nodes))
        assert set(self.edges) == set(self.relations)
        for rel, es in self.edges.items():
            arity = self.relations[rel]
            for e in es:
                assert len(e) == arity, (rel, e)
                assert all(0 <= v < n for v in e), (rel, e)
        if self.kind == "CG":
            assert all(a == 2 for r, a in self.relations.items() if r != SELF)
        if self.kind == "CDHG":
            for rel in ("CFHE", "DFHE"):
                for e in self.edges[rel]:
                    assert self.nodes[e[2]].type == "guard"


class _Builder:
    def __init__(self, kind: str, cap: int):
        self.kind = kind
        self.cap = cap
        self.nodes: list[Node] = []
        self.relations = dict(_KIND_RELATIONS[kind])
        self.edges: dict[str, list] = {r: [] for r in self.relations}
        self.anchors: dict = {}

    def node(self, type_: str, name=None, anchor=None) -> int:
        if len(self.nodes) >= self.cap:
            raise GraphSizeError(self.cap)
        i = len(self.nodes)
        self.nodes.append(Node(i, type_, None if name is None else str(name)))
        if anchor is not None:
            self.anchors[anchor] = i
        return i

    def edge(self, rel: str, *ids: int) -> None:
        assert len(ids) == self.relations[rel]
        self.edges[rel].append(tuple(ids))

    def graph(self) -> HornGraph:
        return HornGraph(self.kind, tuple(self.nodes), dict(self.relations),
                         {r: tuple(es) for r, es in self.edges.items()}, dict(self.anchors))


def _ast_key(t):
    """Structural key; shared subexpressions within a clause get one node."""
    if isinstance(t, Var):
        return ("var", t.name)
    if isinstance(t, IntConst):
        return ("c", t.value)
    if isinstance(t, BoolConst):
        return ("c", t.value)
    if isinstance(t, Comparison):
        return ("op", t.rel, _ast_key(t.lhs), _ast_key(t.rhs))
    return ("op", t.op) + tuple(_ast_key(a) for a in t.args)


def _ast_parts(t):
    """(type, display name, children)."""
    if isinstance(t, Var):
        return "var", t.name, ()
    if isinstance(t, IntConst):
        return "c", str(t.value), ()
    if isinstance(t, BoolConst):
        return "c", "true" if t.value else "false", ()
    if isinstance(t, Comparison):
        return "op", t.rel, (t.lhs, t.rhs)
    return "op", t.op, t.args


def build_cg(system: ClauseSystem, node_cap: int = DEFAULT_NODE_CAP) -> HornGraph:
    """Constraint graph of a (non-normalized) clause system."""
    b = _Builder("CG", node_cap)
    rs: dict[str, int] = {}
    rsa: dict[str, list[int]] = {}
    false_node = None

    for clause in system.clauses:
        # predicate layer
        if clause.head is None and false_node is None:
            false_node = b.node("false", "false", ("false",))
        for a in clause.atoms():
            if a.symbol in rs:
                continue
            rs[a.symbol] = b.node("rs", a.symbol, ("rs", a.symbol))
            rsa[a.symbol] = []
            for i, t in enumerate(a.args):
                v = b.node("rsa", print_term(t), ("rsa", a.symbol, i))
                rsa[a.symbol].append(v)
                b.edge("RSA", rs[a.symbol], v)

        # clause layer
        cla = b.node("cla", None, ("clause", clause.clause_id))
        head = clause.head
        ch = b.node("ch", "false" if head is None else head.symbol)
        b.edge("CH", cla, ch)
        head_ca = []
        for t in (head.args if head is not None else ()):
            v = b.node("ca", print_term(t))
            b.edge("CA", ch, v)
            head_ca.append((v, t))
        body = []
        for a in clause.body:
            cb = b.node("cb", a.symbol)
            b.edge("CB", cb, cla)
            cas = []
            for t in a.args:
                v = b.node("ca", print_term(t))
                b.edge("CA", v, cb)
                cas.append((v, t))
            body.append((a, cb, cas))

        # constraint layer
        seen: dict = {}
        var_nodes: dict[str, int] = {}

        def ast(t) -> int:
            key = _ast_key(t)
            if key in seen:
                return seen[key]
            type_, name, children = _ast_parts(t)
            v = b.node(type_, name)
            seen[key] = v
            if type_ == "var":
                var_nodes[name] = v
            for child in children:
                b.edge("A_st", ast(child), v)
            return v

        roots = [ast(k) for k in clause.constraint]

        # connections between the layers
        if head is None:
            b.edge("RSI", false_node, ch)
        else:
            b.edge("RSI", rs[head.symbol], ch)
            for (v, _), p in zip(head_ca, rsa[head.symbol]):
                b.edge("AI", p, v)
        for a, cb, cas in body:
            b.edge("RSI", cb, rs[a.symbol])
            for (v, _), p in zip(cas, rsa[a.symbol]):
                b.edge("AI", v, p)
        for r in roots:
            b.edge("GUARD", r, cla)
        for name, var in var_nodes.items():
            for ca, t in head_ca:
                if name in term_vars(t):
                    b.edge("DATA", var, ca)
            for _, _, cas in body:
                for ca, t in cas:
                    if name in term_vars(t):
                        b.edge("DATA", *((var, ca) if DATA_EDGE_VAR_TO_CA else (ca, var)))
    g = b.graph()
    g.check()
    return g


def build_cdhg(nsystem: NormalizedSystem, node_cap: int = DEFAULT_NODE_CAP) -> HornGraph:
    """Control- and data-flow hypergraph of a normalized system."""
    b = _Builder("CDHG", node_cap)
    rs: dict[str, int] = {}
    arg_node: dict[str, int] = {}
    if nsystem.clauses:
        initial = b.node("initial", None, ("initial",))
        false_node = b.node("false", "false", ("false",))

    for clause in nsystem.clauses:
        for a in clause.atoms():
            if a.symbol in rs:
                continue
            rs[a.symbol] = b.node("rs", a.symbol, ("rs", a.symbol))
            for i, x in enumerate(nsystem.canonical_args[a.symbol]):
                v = b.node("rsa", x, ("rsa", a.symbol, i))
                arg_node[x] = v
                b.edge("RSA", rs[a.symbol], v)

        guard = b.node("guard", None, ("clause", clause.clause_id))
        seen: dict = {}

        def ast(t) -> int:
            if isinstance(t, Var) and t.name in arg_node:
                return arg_node[t.name]
            key = _ast_key(t)
            if key in seen:
                return seen[key]
            type_, name, children = _ast_parts(t)
            v = b.node(type_, name)
            seen[key] = v
            for rel, child in zip(("A_l", "A_r"), children):
                b.edge(rel, v, ast(child))
            return v

        for g in clause.guards:
            b.edge("Guard", ast(g), guard)

        head = false_node if clause.head is None else rs[clause.head.symbol]
        if clause.body:
            for a in clause.body:
                b.edge("CFHE", head, rs[a.symbol], guard)
        else:
            b.edge("CFHE", head, initial, guard)

        for d in clause.dataflows:
            b.edge("DFHE", arg_node[d.target], ast(d.source), guard)
    g = b.graph()
    g.check()
    return g


def build_pruned_rs_graph(system) -> HornGraph:
    """Relation symbols plus ``false``, one edge body -> head per body literal."""
    if isinstance(system, NormalizedSystem):
        system = system.as_clause_system()
    b = _Builder("PRUNED", DEFAULT_NODE_CAP)
    rs: dict[str, int] = {}
    for clause in system.clauses:
        for a in clause.atoms():
            if a.symbol not in rs:
                rs[a.symbol] = b.node("rs", a.symbol, ("rs", a.symbol))
    false_node = b.node("false", "false", ("false",))
    for clause in system.clauses:
        head = false_node if clause.head is None else rs[clause.head.symbol]
        for a in clause.body:
            b.edge("TRANSITION", rs[a.symbol], head)
    g = b.graph()
    g.check()
    return g


def add_self_loops(graph: HornGraph) -> HornGraph:
    relations = dict(graph.relations)
    relations[SELF] = 1
    edges = dict(graph.edges)
    edges[SELF] = tuple((n.id,) for n in graph.nodes)
    return HornGraph(graph.kind, graph.nodes, relations, edges, dict(graph.anchors))


# -- serialization -----------------------------------------------------------


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(graph: HornGraph) -> str:
    """DOT digraph.  Hyperedges of arity > 2 go through a diamond connector
    node marked ``hyperedge=true`` that carries no graph semantics."""
    lines = [f"digraph {graph.kind} {{"]
    for n in graph.nodes:
        label = n.type if n.name is None else f"{n.type}:{n.name}"
        style = ', style="rounded"' if n.type == "c" else ""
        lines.append(f"  n{n.id} [label={_dot_id(label)}, shape={_SHAPES[n.type]}{style}];")
    hyper = 0
    for rel, es in graph.edges.items():
        for e in es:
            if len(e) == 1:
                lines.append(f"  n{e[0]} -> n{e[0]} [label={_dot_id(rel)}];")
            elif len(e) == 2:
                lines.append(f"  n{e[0]} -> n{e[1]} [label={_dot_id(rel)}];")
            else:
                h = f"h{hyper}"
                hyper += 1
                lines.append(f'  {h} [label={_dot_id(rel)}, shape=diamond, hyperedge="true"];')
                for pos, v in enumerate(e, 1):
                    lines.append(f'  n{v} -> {h} [label="{pos}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _anchor_to_json(anchor, node_id):
    return [node_id, *anchor]


def emit_json(graph: HornGraph, labels=None) -> str:
    """JSON document with nodes, relations, edges and node-keyed labels."""
    out_labels = {}
    for bundle in (labels or []):
        bundle = bundle.on_graph(graph)
        for k in bundle.values:
            if not (isinstance(k, int) and 0 <= k < graph.num_nodes):
                raise ValueError(f"label for {bundle.task} refers to missing node {k!r}")
        out_labels[bundle.task] = {str(k): v for k, v in bundle.values.items()}
    doc = {
        "kind": graph.kind,
        "nodes": [{"id": n.id, "type": n.type, "name": n.name} for n in graph.nodes],
        "relations": dict(graph.relations),
        "edges": {r: [list(e) for e in es] for r, es in graph.edges.items()},
        "labels": out_labels,
        "anchors": [_anchor_to_json(a, i) for a, i in graph.anchors.items()],
    }
    return json.dumps(doc, indent=1)


def read_json(text: str) -> tuple[HornGraph, list[LabelBundle]]:
    doc = json.loads(text)
    nodes = tuple(Node(n["id"], n["type"], n["name"]) for n in doc["nodes"])
    edges = {r: tuple(tuple(e) for e in es) for r, es in doc["edges"].items()}
    anchors = {tuple(a[1:]): a[0] for a in doc.get("anchors", [])}
    graph = HornGraph(doc["kind"], nodes, dict(doc["relations"]), edges, anchors)
    bundles = [LabelBundle(task, {int(k): v for k, v in vals.items()}, "node")
               for task, vals in doc["labels"].items()]
    return graph, bundles
