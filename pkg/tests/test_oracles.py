import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horngraphs.chc import Comparison, IntConst, Var, parse_system
from horngraphs.fm import FMCapExceeded, LinearConstraint, evaluate, fm_satisfiable
from horngraphs.normalize import normalize
from horngraphs.unfold import (
    Derivation, EnumerationCapError, derivation_satisfiable, minimal_clause_sets, refute_bounded,
)
from horngraphs.zones import DBM, is_post_fixpoint, transfer, zone_least_solution

LC = LinearConstraint.make


def test_fm_trivial_cases():
    assert fm_satisfiable([LC({"x": 1}, "<=", 0), LC({"x": -1}, "<=", -1)]) == (False, None)
    ok, w = fm_satisfiable([LC({"x": 1, "n": -1}, "=", 0), LC({"n": -1}, "<=", 0)])
    assert ok and w["x"] == w["n"] and w["n"] >= 0
    assert fm_satisfiable([]) == (True, {})


def test_fm_strict():
    sys_ = [LC({"x": 1, "y": -1}, "<", 1), LC({"y": 1, "x": -1}, "<", 0)]
    ok, w = fm_satisfiable(sys_)  # rational relaxation: 0 < x - y < 1
    assert ok and evaluate(sys_, w) and not float(w["x"] - w["y"]).is_integer()
    assert not fm_satisfiable([LC({"x": 1}, "<", 0), LC({"x": -1}, "<", 0)])[0]


def test_fm_cap():
    rows = [LC({f"x{i}": 1, f"x{j}": -1}, "<=", 1) for i in range(8) for j in range(8) if i != j]
    rows += [LC({f"x{i}": s * 1, f"x{(i + 3) % 8}": 2}, "<=", 5) for i in range(8) for s in (1, -1)]
    with pytest.raises(FMCapExceeded):
        fm_satisfiable(rows, max_constraints=5)


coeff = st.sampled_from([-2, -1, 1, 2, 3])


@settings(max_examples=200)
@given(st.lists(st.tuples(st.dictionaries(st.sampled_from("abc"), coeff, min_size=1),
                          st.sampled_from(["<=", "<", "="]), st.integers(-6, 6)), max_size=5))
def test_fm_witness_is_a_model(rows):
    sys_ = [LC(c, r, b) for c, r, b in rows]
    ok, w = fm_satisfiable(sys_)
    if ok:
        full = {v: w.get(v, Fraction(0)) for c, _, _ in rows for v in c}
        assert evaluate(sys_, full)


def test_derivation_disequality_split():
    x = Var("x")
    cons = [Comparison(">=", x, IntConst(0)), Comparison("<=", x, IntConst(0)),
            Comparison("!=", x, IntConst(0))]
    assert derivation_satisfiable(cons) is False
    cons[1] = Comparison("<=", x, IntConst(1))
    assert derivation_satisfiable(cons) is True


def test_refute_examples(running_example):
    two = parse_system("P(x) :- x = 0.\nfalse :- P(x), x = 0.")
    found = refute_bounded(two, 5)
    assert len(found) == 1 and found[0].depth == 2 and found[0].clause_set() == {0, 1}
    found = refute_bounded(parse_system("false :- true."), 1)
    assert len(found) == 1 and found[0].depth == 1
    for d in range(1, 7):
        assert refute_bounded(running_example, d) == []
        assert refute_bounded(normalize(running_example), d) == []


def test_refute_depth_validation():
    with pytest.raises(ValueError):
        refute_bounded(parse_system("false :- true."), 0)


def test_enumeration_cap():
    s = parse_system("P(x) :- x = 0.\nP(x) :- P(y), P(z), x = y + z.\nfalse :- P(x), x < 0.")
    with pytest.raises(EnumerationCapError):
        refute_bounded(s, 6, cap=1000)


def test_minimal_clause_sets():
    ds = [Derivation(3, (Derivation(0),)), Derivation(3, (Derivation(1, (Derivation(0),)),))]
    assert minimal_clause_sets(ds) == [frozenset({0, 3})]


# -- zones -------------------------------------------------------------------


def test_dbm_close_and_bounds():
    d = DBM(["x", "y"])
    d.tighten(1, 2, 3)   # x - y <= 3
    d.tighten(2, 0, 4)   # y <= 4
    d.tighten(0, 1, -1)  # x >= 1
    assert d.close()
    assert d.upper("x") == 7 and d.lower("x") == 1
    d.tighten(1, 0, 0)   # x <= 0
    assert not d.close()


def test_dbm_join_widen():
    a, b = DBM(["x"]), DBM(["x"])
    a.tighten(1, 0, 1)
    b.tighten(1, 0, 2)
    assert a.join(b).upper("x") == 2
    assert a.widen(a.join(b)).upper("x") == math.inf
    assert a.leq(a.join(b)) and not a.join(b).leq(a)


def test_zone_running_example(running_example):
    ns = normalize(running_example)
    st = zone_least_solution(ns)["L"]
    for v in "xyn":
        assert st.lower(v) == 0 and st.upper(v) == math.inf
    i, j = st.index["x"], st.index["y"]
    assert st.m[i][j] == 0 and st.m[j][i] == 0  # x = y
    assert is_post_fixpoint(ns, zone_least_solution(ns))


def test_zone_fact():
    ns = normalize(parse_system("Q(x) :- x = 5."))
    st = zone_least_solution(ns)["Q"]
    assert st.m[1][0] == 5 and st.m[0][1] == -5


def test_zone_disequality_tightening():
    ns = normalize(parse_system("Q(x) :- x >= 0, x <= 3, x != 3.\nR(y) :- Q(x), x != 0, y = x."))
    st = zone_least_solution(ns)
    assert st["Q"].upper("x") == 2
    assert st["R"].lower("y") == 1


def test_zone_unreachable_is_bottom():
    ns = normalize(parse_system("Q(x) :- x >= 1, x <= 0.\nR(y) :- Q(x), y = x."))
    st = zone_least_solution(ns)
    assert st["Q"] is None and st["R"] is None


def test_transfer_drops_non_difference_atoms():
    ns = normalize(parse_system("Q(x, y) :- x + y = 4, x >= 0."))
    d = transfer(ns.clauses[0], {}, ns.canonical_args)
    assert d.lower("x") == 0 and d.upper("y") == math.inf


def test_zone_post_fixpoint_corpus(corpus):
    for s, _ in corpus:
        ns = normalize(s)
        assert is_post_fixpoint(ns, zone_least_solution(ns))
