"""Hypothesis strategies for random clause systems."""
from hypothesis import strategies as st

from horngraphs.chc import Apply, Atom, BoolConst, Clause, Comparison, IntConst, Var, make_system

VARS = ["x", "y", "z", "n", "x'", "y'", "k"]
SYMBOLS = ["P", "Q", "R", "Inv", "L"]

var = st.sampled_from(VARS).map(Var)
const = st.integers(-20, 20).map(IntConst)


def _extend(children):
    ground = st.integers(-5, 5).map(IntConst)
    return st.one_of(
        st.tuples(st.sampled_from("+-"), children, children).map(lambda t: Apply(t[0], t[1:])),
        st.tuples(ground, children).map(lambda t: Apply("*", t)),
        st.tuples(children, ground).map(lambda t: Apply("*", t)),
        var.map(lambda v: Apply("-", (v,))),
    )


terms = st.recursive(st.one_of(var, const), _extend, max_leaves=6)

comparisons = st.builds(Comparison, st.sampled_from(["=", "<=", "<", ">=", ">", "!="]), terms, terms)
constraints = st.one_of(comparisons, comparisons, st.booleans().map(BoolConst))


@st.composite
def systems(draw, max_clauses=5, linear_only=False):
    arity = {s: draw(st.integers(0, 3)) for s in SYMBOLS}
    atom_of = lambda s: st.lists(var if linear_only else terms, min_size=arity[s],
                                 max_size=arity[s]).map(lambda a, s=s: Atom(s, tuple(a)))
    atom = st.sampled_from(SYMBOLS).flatmap(atom_of)
    n = draw(st.integers(1, max_clauses))
    clauses = []
    for _ in range(n):
        head = draw(st.one_of(st.none(), atom))
        body = tuple(draw(st.lists(atom, max_size=3)))
        cons = tuple(draw(st.lists(constraints, max_size=3)))
        clauses.append(Clause(head, body, cons))
    return make_system(clauses)


@st.composite
def symbol_graphs(draw):
    """Systems whose constraints are trivial; only the symbol graph matters."""
    syms = SYMBOLS[: draw(st.integers(1, len(SYMBOLS)))]
    clauses = []
    for _ in range(draw(st.integers(1, 8))):
        head = draw(st.one_of(st.none(), st.sampled_from(syms)))
        body = draw(st.lists(st.sampled_from(syms), max_size=3))
        clauses.append(Clause(None if head is None else Atom(head, ()),
                              tuple(Atom(b, ()) for b in body), ()))
    return make_system(clauses)
