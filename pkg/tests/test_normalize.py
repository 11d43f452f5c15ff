from hypothesis import given, settings

from horngraphs.chc import Var, parse_system, print_constraint, term_vars
from horngraphs.normalize import normalize, read_copy_map, split_constraint, write_copy_map

from strategies import systems

TABLE = [
    # clause, guards, dataflows
    ("L(x,y,n) :- n >= 0, x = n, y = n.", ["n >= 0"], ["x = n", "y = n"]),
    ("L(x,y,n) :- L'(x',y',n'), x != 0, x = x' - 1, y = y' - 1.",
     ["x != 0"], ["x = x' - 1", "y = y' - 1"]),
    ("L'(x',y',n') :- L(x,y,n), x' = x, y' = y, n' = n.", [], ["x' = x", "y' = y", "n' = n"]),
    ("false :- L(x,y,n), y != 0, x = 0.", ["y != 0"], ["x = 0"]),
]


def rows(ns):
    return [(str(c.as_clause()), [print_constraint(g) for g in c.guards],
             [str(d) for d in c.dataflows]) for c in ns.clauses]


def test_table_rows(table_variant):
    assert rows(normalize(table_variant)) == TABLE


def test_running_example_differs_only_in_loop_row(running_example):
    got = rows(normalize(running_example))
    assert [got[i] for i in (0, 2, 3)] == [TABLE[i] for i in (0, 2, 3)]
    clause, guards, flows = got[1]
    assert guards == ["x' != 0"]
    assert flows == ["x = x' - 1", "y = y' - 1", "n = n'"]


def test_copy_symbols(running_example):
    ns = normalize(running_example)
    assert ns.copy_of == {"L'": "L"}
    assert ns.canonical_args == {"L": ("x", "y", "n"), "L'": ("x'", "y'", "n'")}
    assert ns.origin_symbol("L'") == "L"
    assert [c.is_copy for c in ns.clauses] == [False, False, True, False]
    assert [c.origin_clause_id for c in ns.clauses] == [0, 1, 1, 2]


def test_repeated_body_symbol_gets_two_copies():
    ns = normalize(parse_system("Q(a) :- Q(b), Q(c)."))
    assert set(ns.copy_of) == {"Q'", "Q''"}
    head_clause = ns.clauses[0]
    assert [a.symbol for a in head_clause.body] == ["Q'", "Q''"]


def test_composite_and_repeated_arguments_are_lowered():
    ns = normalize(parse_system("P(x, y) :- x = 1, y = 2.\nfalse :- P(z + 1, z)."))
    q = ns.clauses[1]
    assert q.body[0].args == (Var("x"), Var("y"))
    text = [print_constraint(k) for k in q.constraint()]
    assert any("+ 1" in t for t in text)


def test_copy_map_roundtrip(running_example):
    ns = normalize(running_example)
    assert read_copy_map(write_copy_map(ns)) == ns.copy_of
    assert write_copy_map(ns) == "L'\tL\n"


def test_split_sources_must_be_body_arguments():
    s = parse_system("P(x, y) :- Q(a, b), x = y + 1, y = x - 1.")
    c = s.clauses[0]
    guards, flows = split_constraint(c.head, c.body, c.constraint)
    # both sides read head arguments only, so neither is a dataflow
    assert [str(d) for d in flows] == []
    assert len(guards) == 2
    # y = x reads an assigned variable
    s = parse_system("P(x, y) :- Q(a, b), x = a + 1, y = x.")
    c = s.clauses[0]
    guards, flows = split_constraint(c.head, c.body, c.constraint)
    assert [str(d) for d in flows] == ["x = a + 1"]


def _check_normal_form(ns):
    seen_vectors = {}
    for c in ns.clauses:
        atoms = list(c.atoms())
        syms = [a.symbol for a in atoms]
        assert len(set(syms)) == len(syms), "symbol repeated within a clause"
        for a in atoms:
            assert all(isinstance(t, Var) for t in a.args)
            vec = tuple(t.name for t in a.args)
            assert vec == ns.canonical_args[a.symbol]
            seen_vectors[a.symbol] = vec
        assigned = [d.target for d in c.dataflows]
        assert len(set(assigned)) == len(assigned)
        for d in c.dataflows:
            assert d.target not in set(term_vars(d.source))
    flat = [v for vec in ns.canonical_args.values() for v in vec]
    assert len(flat) == len(set(flat)), "argument vectors overlap"


@settings(max_examples=150)
@given(systems())
def test_normal_form_properties(s):
    _check_normal_form(normalize(s))


def test_corpus_normal_form(corpus):
    for s, _ in corpus:
        _check_normal_form(normalize(s))
