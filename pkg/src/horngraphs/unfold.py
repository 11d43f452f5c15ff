"""Bounded unfolding of clause systems into derivations of ``false``.

A derivation is a tree of clause instances: the root has a ``false`` head
and each body literal is resolved by a child whose head has the same
symbol.  It is a counterexample when the conjunction of all instantiated
constraints and head/body argument equalities is satisfiable.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from .chc import BoolConst, Clause, Comparison, clause_vars, linear_form, substitute_term
from .fm import LinearConstraint, evaluate, fm_satisfiable
from .normalize import NormalizedSystem

__all__ = ["Derivation", "EnumerationCapError", "refute_bounded", "derivation_satisfiable",
           "instantiate", "to_linear"]

log = logging.getLogger(__name__)

MAX_DISEQ_SPLITS = 8


class EnumerationCapError(RuntimeError):
    pass


@dataclass(frozen=True)
class Derivation:
    clause_id: int
    children: tuple = ()
    constraint: tuple = ()

    @property
    def depth(self) -> int:
        return 1 + max((c.depth for c in self.children), default=0)

    def clause_ids(self) -> list[int]:
        out = [self.clause_id]
        for c in self.children:
            out += c.clause_ids()
        return out

    def clause_set(self) -> frozenset:
        return frozenset(self.clause_ids())

    def shape(self):
        return (self.clause_id, tuple(c.shape() for c in self.children))


def _as_clauses(system) -> list[Clause]:
    if isinstance(system, NormalizedSystem):
        return [c.as_clause() for c in system.clauses]
    return list(system.clauses)


def instantiate(tree: Derivation, clauses: dict) -> list:
    """Constraints of a derivation tree over freshly renamed variables."""
    out = []
    counter = [0]

    def walk(node: Derivation, head_args):
        c = clauses[node.clause_id]
        k = counter[0]
        counter[0] += 1
        sub = {v: f"{v}#{k}" for v in clause_vars(c)}
        if head_args is not None:
            for t, s in zip(c.head.args, head_args):
                out.append(Comparison("=", substitute_term(t, sub), s))
        out.extend(
            Comparison(x.rel, substitute_term(x.lhs, sub), substitute_term(x.rhs, sub))
            if isinstance(x, Comparison) else x
            for x in c.constraint)
        for atom, child in zip(c.body, node.children):
            walk(child, [substitute_term(t, sub) for t in atom.args])

    walk(tree, None)
    return out


def to_linear(constraints):
    """Split into (linear system, disequalities, trivially_false).

    Strict integer comparisons are tightened to non-strict ones."""
    system, diseqs = [], []
    for k in constraints:
        if isinstance(k, BoolConst):
            if not k.value:
                return system, diseqs, True
            continue
        lc, lk = linear_form(k.lhs)
        rc, rk = linear_form(k.rhs)
        co = dict(lc)
        for v, a in rc.items():
            co[v] = co.get(v, 0) - a
        co = {v: a for v, a in co.items() if a}
        bound = rk - lk  # co.x  rel  bound
        if k.rel == "!=":
            if not co:
                if bound == 0:
                    return system, diseqs, True
                continue
            diseqs.append((co, bound))
        elif k.rel == "=":
            system.append(LinearConstraint.make(co, "=", bound))
        elif k.rel == "<=":
            system.append(LinearConstraint.make(co, "<=", bound))
        elif k.rel == "<":
            system.append(LinearConstraint.make(co, "<=", bound - 1))
        elif k.rel == ">=":
            system.append(LinearConstraint.make({v: -a for v, a in co.items()}, "<=", -bound))
        else:
            system.append(LinearConstraint.make({v: -a for v, a in co.items()}, "<=", -bound - 1))
    return system, diseqs, False


def derivation_satisfiable(constraints) -> bool | None:
    """Satisfiability of instantiated constraints; None if the disequality
    case split exceeds its cap."""
    system, diseqs, bad = to_linear(constraints)
    if bad:
        return False

    def solve(sys_, budget):
        ok, point = fm_satisfiable(sys_)
        if not ok:
            return False
        full = {v: point.get(v, Fraction(0)) for co, _ in diseqs for v in co}
        full.update(point)
        for co, b in diseqs:
            if sum(c * full[v] for v, c in co.items()) == b:
                if budget == 0:
                    return None
                lower = solve(sys_ + [LinearConstraint.make(co, "<=", b - 1)], budget - 1)
                if lower:
                    return True
                neg = {v: -c for v, c in co.items()}
                upper = solve(sys_ + [LinearConstraint.make(neg, "<=", -b - 1)], budget - 1)
                if upper:
                    return True
                return None if (lower is None or upper is None) else False
        assert evaluate(sys_, full)
        return True

    return solve(system, MAX_DISEQ_SPLITS)


def refute_bounded(system, max_depth: int, cap: int = 100_000) -> list[Derivation]:
    """All satisfiable derivations of ``false`` with height at most ``max_depth``.

    Trees are enumerated per (symbol, depth), clauses in system order, so
    the result order is deterministic.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    clauses = _as_clauses(system)
    by_id = {c.clause_id: c for c in clauses}
    defining: dict[str, list[Clause]] = {}
    for c in clauses:
        if c.head is not None:
            defining.setdefault(c.head.symbol, []).append(c)
    memo: dict = {}
    produced = [0]

    def trees(clause: Clause, depth: int) -> list:
        """Shapes rooted at ``clause`` with height <= depth."""
        if depth < 1:
            return []
        combos = [()]
        for atom in clause.body:
            subs = sym_trees(atom.symbol, depth - 1)
            combos = [prev + (s,) for prev in combos for s in subs]
            if not combos:
                return []
        produced[0] += len(combos)
        if produced[0] > cap:
            raise EnumerationCapError(f"more than {cap} candidate derivation trees")
        return [Derivation(clause.clause_id, children) for children in combos]

    def sym_trees(symbol: str, depth: int) -> list:
        key = (symbol, depth)
        if key not in memo:
            memo[key] = [t for c in defining.get(symbol, []) for t in trees(c, depth)]
        return memo[key]

    found = []
    for c in clauses:
        if c.head is not None:
            continue
        for tree in trees(c, max_depth):
            constraint = instantiate(tree, by_id)
            sat = derivation_satisfiable(constraint)
            if sat is None:
                log.warning("disequality split cap hit; derivation %s skipped", tree.shape())
            if sat:
                found.append(Derivation(tree.clause_id, tree.children, tuple(constraint)))
    return found


def minimal_clause_sets(derivations) -> list[frozenset]:
    sets = sorted({d.clause_set() for d in derivations}, key=lambda s: (len(s), sorted(s)))
    return [s for s in sets if not any(o < s for o in sets)]
