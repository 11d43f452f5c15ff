"""
The exact analyses behind the labels
====================================

Zones with widening give the bound labels, Fourier-Motzkin decides the
constraints of unfolded derivations, and bounded unfolding finds the
counterexamples whose clause sets give the refutation labels.
"""
from horngraphs import normalize, parse_system
from horngraphs.chc import Comparison, IntConst, Var
from horngraphs.labels import mus_labels
from horngraphs.unfold import minimal_clause_sets, refute_bounded, to_linear
from horngraphs.fm import fm_satisfiable
from horngraphs.zones import is_post_fixpoint, zone_least_solution

loop = parse_system("""
L(i, n) :- i = 0, n >= 0, n <= 10.
L(i, n) :- L(i', n'), i' < n', i = i' + 1, n = n'.
false :- L(i, n), i > n.
""")
ns = normalize(loop)
states = zone_least_solution(ns)
z = states["L"]
print("i in", (z.lower("i"), z.upper("i")), " n in", (z.lower("n"), z.upper("n")))
print("post-fixpoint:", is_post_fixpoint(ns, states))

# %% a tiny linear system, decided over the rationals after integer tightening
x, y = Var("x"), Var("y")
cons = [Comparison(">", x, IntConst(2)), Comparison("<", y, IntConst(4)),
        Comparison("<=", x, y)]
system, diseqs, trivially_false = to_linear(cons)
print(fm_satisfiable(system))

# %% an unsafe program: the loop reaches zero and the query then holds.
# J plays no part in the counterexample, so it lies outside every clause set
bad = parse_system("""
L(i) :- i = 3.
L(i) :- L(i'), i' > 0, i = i' - 1.
M(i) :- L(i), i = 0.
false :- M(i), i <= 0.
J(q) :- q = 1.
""")
derivations = refute_bounded(bad, 6)
print(len(derivations), "counterexamples within depth 6")
for keep in minimal_clause_sets(derivations):
    print("minimal clause set:", sorted(keep))
inter, union = mus_labels(bad, 6)
print("in every set:", inter.values)
print("in some set: ", union.values)
