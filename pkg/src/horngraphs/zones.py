"""Zone (difference-bound matrix) analysis of normalized clause systems.

Computes an over-approximation of the least solution: for every relation
symbol a DBM over its canonical arguments.  Entries are Python ints or
``math.inf``; row/column 0 is the constant zero, and ``m[i][j]`` bounds
``x_i - x_j``.
"""
from __future__ import annotations

import math

from .chc import BoolConst, Comparison, clause_vars, linear_form
from .normalize import NormalizedClause, NormalizedSystem

__all__ = ["DBM", "ZoneState", "transfer", "zone_least_solution", "is_post_fixpoint",
           "apply_all", "BOTTOM"]

INF = math.inf
BOTTOM = None


class DBM:
    """Square bound matrix over ``["0", *names]``."""

    def __init__(self, names, m=None):
        self.names = list(names)
        self.index = {v: i + 1 for i, v in enumerate(self.names)}
        n = len(self.names) + 1
        if m is None:
            m = [[0 if i == j else INF for j in range(n)] for i in range(n)]
        self.m = m

    @property
    def size(self) -> int:
        return len(self.m)

    def copy(self) -> "DBM":
        return DBM(self.names, [row[:] for row in self.m])

    def __eq__(self, other) -> bool:
        return isinstance(other, DBM) and self.names == other.names and self.m == other.m

    def __repr__(self) -> str:
        return f"DBM({self.names}, {self.m})"

    def tighten(self, i: int, j: int, c) -> bool:
        if c < self.m[i][j]:
            self.m[i][j] = c
            return True
        return False

    def close(self) -> bool:
        """Floyd-Warshall shortest paths.  Returns False if empty."""
        m, n = self.m, self.size
        for k in range(n):
            mk = m[k]
            for i in range(n):
                mik = m[i][k]
                if mik == INF:
                    continue
                mi = m[i]
                for j in range(n):
                    s = mik + mk[j]
                    if s < mi[j]:
                        mi[j] = s
        return all(m[i][i] >= 0 for i in range(n))

    def leq(self, other: "DBM") -> bool:
        return all(a <= b for ra, rb in zip(self.m, other.m) for a, b in zip(ra, rb))

    def join(self, other: "DBM") -> "DBM":
        return DBM(self.names, [[max(a, b) for a, b in zip(ra, rb)]
                                for ra, rb in zip(self.m, other.m)])

    def widen(self, new: "DBM") -> "DBM":
        return DBM(self.names, [[a if b <= a else INF for a, b in zip(ra, rb)]
                                for ra, rb in zip(self.m, new.m)])

    def project(self, names) -> "DBM":
        idx = [0] + [self.index[v] for v in names]
        return DBM(names, [[self.m[i][j] for j in idx] for i in idx])

    def embed(self, other: "DBM") -> None:
        """Meet with ``other``, whose variables must all be present here."""
        idx = [0] + [self.index[v] for v in other.names]
        for a, i in enumerate(idx):
            for b, j in enumerate(idx):
                self.tighten(i, j, other.m[a][b])

    def upper(self, name: str):
        """Upper bound of ``name`` (``inf`` if none)."""
        return self.m[self.index[name]][0]

    def lower(self, name: str):
        """Lower bound of ``name`` (``-inf`` if none)."""
        c = self.m[0][self.index[name]]
        return -c if c != INF else -INF


ZoneState = DBM  # None stands for bottom


def _diff_parts(coeffs: dict):
    """``(u, v, s)`` with ``s > 0`` and ``coeffs.x == s*(x_u - x_v)``; None for the
    zero variable.  Returns None when the form is not a difference."""
    items = list(coeffs.items())
    if len(items) == 1:
        (v, a), = items
        return (v, None, a) if a > 0 else (None, v, -a)
    if len(items) == 2:
        (u, a), (v, b) = items
        if a == -b:
            return (u, v, a) if a > 0 else (v, u, b)
    return None


def _difference(coeffs: dict, k: int):
    """Read ``coeffs.x + k <= 0`` as ``x_u - x_v <= c``; None otherwise."""
    parts = _diff_parts(coeffs)
    if parts is None:
        return None
    u, v, s = parts
    return u, v, (-k) // s


def _leq_forms(c: Comparison):
    """Normal forms ``e <= 0`` (as (coeffs, k)) implied by a comparison."""
    lc, lk = linear_form(c.lhs)
    rc, rk = linear_form(c.rhs)
    co = dict(lc)
    for v, a in rc.items():
        co[v] = co.get(v, 0) - a
    co = {v: a for v, a in co.items() if a}
    k = lk - rk
    neg = ({v: -a for v, a in co.items()}, -k)
    if c.rel == "=":
        return [(co, k), neg]
    if c.rel == "<=":
        return [(co, k)]
    if c.rel == "<":
        return [(co, k + 1)]
    if c.rel == ">=":
        return [neg]
    if c.rel == ">":
        return [(neg[0], neg[1] + 1)]
    return []


def _apply_leq(d: DBM, co: dict, k: int) -> bool:
    """Add ``co.x + k <= 0`` if expressible; False if trivially unsatisfiable."""
    if not co:
        return k <= 0
    diff = _difference(co, k)
    if diff is None:
        return True  # not a zone constraint: dropped
    u, v, c = diff
    d.tighten(d.index[u] if u else 0, d.index[v] if v else 0, c)
    return True


def _tighten_disequalities(d: DBM, diseqs) -> bool:
    """Integer tightening for ``e != 0`` whose bound sits exactly at the excluded value."""
    changed = False
    for co, k in diseqs:
        parts = _diff_parts(co)
        if parts is None:
            continue
        u, v, s = parts
        if k % s:
            continue
        val = -k // s  # excluded value of x_u - x_v
        i = d.index[u] if u else 0
        j = d.index[v] if v else 0
        if d.m[i][j] == val:
            changed |= d.tighten(i, j, val - 1)
        if d.m[j][i] == -val:
            changed |= d.tighten(j, i, -val - 1)
    return changed


def transfer(clause: NormalizedClause, states: dict, canonical: dict):
    """Post-state of ``clause`` for its head symbol, or None (bottom)."""
    if clause.head is None:
        return BOTTOM
    variables = list(canonical[clause.head.symbol])
    for a in clause.body:
        variables += [v for v in canonical[a.symbol] if v not in variables]
    variables += [v for v in clause_vars(clause.as_clause()) if v not in variables]
    d = DBM(variables)
    for a in clause.body:
        s = states.get(a.symbol)
        if s is BOTTOM:
            return BOTTOM
        d.embed(s)
    diseqs = []
    for k in clause.constraint():
        if isinstance(k, BoolConst):
            if not k.value:
                return BOTTOM
            continue
        if k.rel == "!=":
            lc, lk = linear_form(k.lhs)
            rc, rk = linear_form(k.rhs)
            co = dict(lc)
            for v, a in rc.items():
                co[v] = co.get(v, 0) - a
            co = {v: a for v, a in co.items() if a}
            if not co:
                if lk == rk:
                    return BOTTOM
                continue
            diseqs.append((co, lk - rk))
            continue
        for co, c in _leq_forms(k):
            if not _apply_leq(d, co, c):
                return BOTTOM
    for _ in range(len(diseqs) + 1):
        if not d.close():
            return BOTTOM
        if not _tighten_disequalities(d, diseqs):
            break
    else:
        if not d.close():
            return BOTTOM
    return d.project(list(canonical[clause.head.symbol]))


def _join(a, b):
    if a is BOTTOM:
        return b
    if b is BOTTOM:
        return a
    return a.join(b)


def apply_all(nsystem: NormalizedSystem, states: dict) -> dict:
    """One application of every clause's transfer, joined per head symbol."""
    out = {q: BOTTOM for q in nsystem.signatures}
    for c in nsystem.clauses:
        if c.head is not None:
            out[c.head.symbol] = _join(out[c.head.symbol],
                                       transfer(c, states, nsystem.canonical_args))
    return out


def _closed(s):
    if s is BOTTOM:
        return BOTTOM
    s = s.copy()
    return s if s.close() else BOTTOM


def zone_least_solution(nsystem: NormalizedSystem, widening_delay: int = 2,
                        max_rounds: int = 10_000) -> dict:
    """Post-fixpoint of the clause transfers with widening, then one narrowing pass."""
    states = {q: BOTTOM for q in nsystem.signatures}
    for rnd in range(max_rounds):
        closed = {q: _closed(s) for q, s in states.items()}
        step = apply_all(nsystem, closed)
        new = {}
        changed = False
        for q in states:
            old = states[q]
            nxt = _join(closed[q], step[q])
            if old is not BOTTOM and nxt is not BOTTOM:
                if rnd >= widening_delay:
                    nxt = old.widen(nxt)
                if nxt == old:
                    new[q] = old
                    continue
            elif old is BOTTOM and nxt is BOTTOM:
                new[q] = old
                continue
            new[q] = nxt
            changed = True
        states = new
        if not changed:
            break
    else:
        raise RuntimeError("zone iteration did not stabilise")
    states = {q: _closed(s) for q, s in states.items()}
    return apply_all(nsystem, states)


def is_post_fixpoint(nsystem: NormalizedSystem, states: dict) -> bool:
    """True iff one more transfer+join leaves every state unchanged."""
    step = apply_all(nsystem, states)
    for q, s in states.items():
        joined = _join(s, step[q])
        if (joined is BOTTOM) != (s is BOTTOM):
            return False
        if s is not BOTTOM and joined != s:
            return False
    return True
