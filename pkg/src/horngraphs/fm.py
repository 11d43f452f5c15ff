"""Fourier-Motzkin satisfiability for conjunctions of linear constraints.

Works over the rationals: ``unsat`` is sound for the integers, a ``sat``
witness may be fractional.  Disequalities are not handled here; callers
split them into ``<`` / ``>`` cases first.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

__all__ = ["LinearConstraint", "LinearSystem", "FMCapExceeded", "fm_satisfiable", "evaluate"]


class FMCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class LinearConstraint:
    """``sum(coeffs[v] * v) rel bound`` with ``rel`` in ``<=``, ``<``, ``=``."""

    coeffs: tuple  # sorted (var, Fraction) pairs, no zeros
    rel: str
    bound: Fraction

    @staticmethod
    def make(coeffs: dict, rel: str, bound) -> "LinearConstraint":
        if rel not in ("<=", "<", "="):
            raise ValueError(f"unsupported relation {rel!r}")
        co = tuple(sorted((v, Fraction(c)) for v, c in coeffs.items() if c))
        return LinearConstraint(co, rel, Fraction(bound))

    def holds(self, point: dict) -> bool:
        lhs = sum((c * point[v] for v, c in self.coeffs), Fraction(0))
        if self.rel == "<=":
            return lhs <= self.bound
        if self.rel == "<":
            return lhs < self.bound
        return lhs == self.bound


LinearSystem = list  # of LinearConstraint


def evaluate(system, point: dict) -> bool:
    return all(c.holds(point) for c in system)


def _scaled(co: dict, bound: Fraction):
    """Divide by the gcd of the numerators so duplicates collapse."""
    if not co:
        return co, bound
    den = 1
    for c in list(co.values()) + [bound]:
        den = den * c.denominator // gcd(den, c.denominator)
    nums = [int(c * den) for c in co.values()]
    g = 0
    for n in nums:
        g = gcd(g, n)
    f = Fraction(den, g)
    return {v: c * f for v, c in co.items()}, bound * f


def fm_satisfiable(system, max_constraints: int = 20_000):
    """Return ``(True, witness)`` or ``(False, None)``."""
    # rows: (coeff dict, bound, strict)
    rows = []
    for c in system:
        co = dict(c.coeffs)
        if c.rel == "=":
            rows.append((co, c.bound, False))
            rows.append(({v: -a for v, a in co.items()}, -c.bound, False))
        else:
            rows.append((co, c.bound, c.rel == "<"))
    variables = sorted({v for co, _, _ in rows for v in co})
    eliminated = []  # (var, rows mentioning it) for back substitution

    def dedupe(rs):
        seen = {}
        for co, b, s in rs:
            co, b = _scaled(co, b)
            key = tuple(sorted(co.items()))
            old = seen.get(key)
            # keep the tightest bound for identical left-hand sides
            if old is None or b < old[1] or (b == old[1] and s and not old[2]):
                seen[key] = (co, b, s)
        return list(seen.values())

    rows = dedupe(rows)
    remaining = list(variables)
    while remaining:
        for co, b, s in rows:
            if not co and (b < 0 or (s and b == 0)):
                return False, None
        # eliminate the variable with the fewest generated pairs
        def cost(v):
            pos = sum(1 for co, _, _ in rows if co.get(v, 0) > 0)
            neg = sum(1 for co, _, _ in rows if co.get(v, 0) < 0)
            return pos * neg - pos - neg

        v = min(remaining, key=lambda x: (cost(x), x))
        remaining.remove(v)
        pos = [r for r in rows if r[0].get(v, 0) > 0]
        neg = [r for r in rows if r[0].get(v, 0) < 0]
        rest = [r for r in rows if v not in r[0]]
        eliminated.append((v, pos, neg))
        for pc, pb, ps in pos:
            for nc, nb, ns in neg:
                a, b_ = pc[v], -nc[v]
                co = {}
                for x, c in pc.items():
                    co[x] = co.get(x, 0) + c * b_
                for x, c in nc.items():
                    co[x] = co.get(x, 0) + c * a
                co = {x: c for x, c in co.items() if c and x != v}
                rest.append((co, pb * b_ + nb * a, ps or ns))
        rows = dedupe(rest)
        if len(rows) > max_constraints:
            raise FMCapExceeded(f"{len(rows)} constraints after eliminating {v}")
    for co, b, s in rows:
        if b < 0 or (s and b == 0):
            return False, None

    # back substitution in reverse elimination order
    point: dict = {}
    for v, pos, neg in reversed(eliminated):
        hi, hi_strict = None, False
        lo, lo_strict = None, False
        for co, b, s in pos:  # a*v + r <= b  ->  v <= (b - r)/a
            val = (b - sum(c * point[x] for x, c in co.items() if x != v)) / co[v]
            if hi is None or val < hi or (val == hi and s):
                hi, hi_strict = val, s
        for co, b, s in neg:  # -a*v + r <= b  ->  v >= (r - b)/a
            val = (b - sum(c * point[x] for x, c in co.items() if x != v)) / co[v]
            if lo is None or val > lo or (val == lo and s):
                lo, lo_strict = val, s
        point[v] = _pick(lo, lo_strict, hi, hi_strict)
    return True, point


def _pick(lo, lo_strict, hi, hi_strict) -> Fraction:
    """A value in the interval, integral when one fits."""
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        c = Fraction(int(hi // 1))
        return c - 1 if hi_strict and c == hi else c
    if hi is None:
        c = -Fraction(int((-lo) // 1))
        return c + 1 if lo_strict and c == lo else c
    c = -Fraction(int((-lo) // 1))
    if lo_strict and c == lo:
        c += 1
    if c < hi or (c == hi and not hi_strict):
        return c
    return (lo + hi) / 2 if lo != hi else lo
