"""Clause normalization and control-/data-flow splitting.

After :func:`normalize` every relation symbol occurs at most once per
clause and every occurrence of ``q`` is written ``q(x_q)`` for one fixed
vector ``x_q`` of distinct variables; the vectors of different symbols are
disjoint.  Repeated occurrences are routed through primed copy symbols
``q'(x') <- q(x) /\\ x' = x``.  Each constraint is then split into guards
and dataflows ``x = t(y)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count

from .chc import (
    Atom, Clause, ClauseSystem, Comparison, Term, Var,
    clause_vars, print_constraint, print_term, substitute_constraint,
    substitute_term, term_vars,
)

__all__ = [
    "DataflowFormula", "NormalizedClause", "NormalizedSystem", "normalize",
    "split_constraint", "read_copy_map", "write_copy_map",
]


@dataclass(frozen=True)
class DataflowFormula:
    """``target = source``; ``atom`` is the conjunct it was read from."""

    target: str
    source: Term
    atom: Comparison | None = None

    def as_constraint(self) -> Comparison:
        return Comparison("=", Var(self.target), self.source)

    def __str__(self) -> str:
        return f"{self.target} = {print_term(self.source)}"


@dataclass(frozen=True)
class NormalizedClause:
    head: Atom | None
    body: tuple
    guards: tuple
    dataflows: tuple
    origin_clause_id: int
    is_copy: bool = False
    clause_id: int = 0

    @property
    def is_query(self) -> bool:
        return self.head is None

    def atoms(self):
        if self.head is not None:
            yield self.head
        yield from self.body

    def constraint(self) -> tuple:
        """Guards followed by the dataflows written as equalities."""
        return tuple(self.guards) + tuple(d.as_constraint() for d in self.dataflows)

    def as_clause(self) -> Clause:
        return Clause(self.head, tuple(self.body), self.constraint(), self.clause_id)

    def __str__(self) -> str:
        g = ", ".join(print_constraint(x) for x in self.guards) or "empty"
        d = ", ".join(str(x) for x in self.dataflows) or "empty"
        return f"{self.as_clause()}    [guards: {g}] [dataflows: {d}]"


@dataclass(frozen=True)
class NormalizedSystem:
    clauses: tuple
    signatures: dict
    canonical_args: dict
    copy_of: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)

    def symbols(self) -> list[str]:
        return list(self.signatures)

    def origin_symbol(self, symbol: str) -> str:
        while symbol in self.copy_of:
            symbol = self.copy_of[symbol]
        return symbol

    def as_clause_system(self) -> ClauseSystem:
        return ClauseSystem(tuple(c.as_clause() for c in self.clauses), dict(self.signatures))


class _Names:
    """Hands out names not yet taken."""

    def __init__(self, taken):
        self.taken = set(taken)
        self._ids = count()

    def claim(self, name: str) -> str:
        self.taken.add(name)
        return name

    def fresh(self, stem: str) -> str:
        while True:
            name = f"{stem}{next(self._ids)}"
            if name not in self.taken:
                return self.claim(name)


def _prime(symbol: str, taken: set) -> str:
    name = symbol + "'"
    while name in taken:
        name += "'"
    return name


def normalize(system: ClauseSystem) -> NormalizedSystem:
    """Rewrite ``system`` into normalized, split clauses."""
    symbols = set(system.signatures)
    sigs = dict(system.signatures)
    copy_of: dict[str, str] = {}

    # 1. route repeated symbol occurrences through fresh copy symbols
    staged = []  # (head, body, constraint, origin, is_copy)
    for c in system.clauses:
        used = {c.head.symbol} if c.head is not None else set()
        body = []
        copies = []
        for a in c.body:
            if a.symbol in used:
                sym = _prime(a.symbol, symbols)
                symbols.add(sym)
                sigs[sym] = a.arity
                copy_of[sym] = a.symbol
                copies.append((sym, a.symbol, a.arity))
                a = Atom(sym, a.args)
            used.add(a.symbol)
            body.append(a)
        staged.append((c.head, tuple(body), c.constraint, c.clause_id, False))
        for sym, orig, arity in copies:
            staged.append((sym, orig, arity, c.clause_id, True))

    # 2. one canonical argument vector per symbol, in order of first occurrence
    canonical: dict[str, tuple] = {}
    claimed: set[str] = set()
    all_vars = {v for c in system.clauses for v in clause_vars(c)}
    names = _Names(all_vars | claimed)

    def assign(symbol: str, args) -> None:
        if symbol in canonical:
            return
        plain = [t.name for t in args if isinstance(t, Var)]
        if len(plain) == len(args) and len(set(plain)) == len(plain) and not claimed & set(plain):
            vec = tuple(plain)
        else:
            vec = tuple(names.fresh("a") for _ in args)
        claimed.update(vec)
        canonical[symbol] = vec

    for item in staged:
        if item[4]:
            sym, orig, arity, _, _ = item
            # the copy symbol's first occurrence was already seen in its origin clause
            assign(orig, [None] * arity)
            continue
        head, body, _, _, _ = item
        for a in ([head] if head is not None else []) + list(body):
            assign(a.symbol, a.args)
    names.taken |= claimed

    # 3. rewrite clauses onto canonical vectors and split
    out = []
    for item in staged:
        if item[4]:
            sym, orig, _, origin, _ = item
            head = Atom(sym, tuple(Var(v) for v in canonical[sym]))
            src = Atom(orig, tuple(Var(v) for v in canonical[orig]))
            constraint = tuple(Comparison("=", Var(x), Var(y))
                               for x, y in zip(canonical[sym], canonical[orig]))
            out.append(_split_clause(head, (src,), constraint, origin, True, len(out)))
            continue
        head, body, constraint, origin, _ = item
        out.append(_rewrite(head, body, constraint, origin, canonical, claimed, names, len(out)))

    return NormalizedSystem(tuple(out), sigs, canonical, copy_of)


def _rewrite(head, body, constraint, origin, canonical, claimed, names, cid) -> NormalizedClause:
    mapping: dict[str, str] = {}
    lowered: list[tuple[str, Term]] = []
    atoms = ([head] if head is not None else []) + list(body)
    for a in atoms:
        for slot, t in zip(canonical[a.symbol], a.args):
            if isinstance(t, Var) and t.name not in mapping:
                mapping[t.name] = slot
            else:
                lowered.append((slot, t))
    targets = set(mapping.values())
    for v in clause_vars(Clause(head, body, constraint)):
        if v not in mapping:
            mapping[v] = names.fresh("v") if (v in claimed or v in targets) else v
            targets.add(mapping[v])
    new_atoms = [Atom(a.symbol, tuple(Var(x) for x in canonical[a.symbol])) for a in atoms]
    new_head = new_atoms[0] if head is not None else None
    new_body = tuple(new_atoms[1:] if head is not None else new_atoms)
    conj = [Comparison("=", Var(slot), substitute_term(t, mapping)) for slot, t in lowered]
    conj += [substitute_constraint(k, mapping) for k in constraint]
    return _split_clause(new_head, new_body, tuple(conj), origin, False, cid)


def _split_clause(head, body, constraint, origin, is_copy, cid) -> NormalizedClause:
    guards, flows = split_constraint(head, body, constraint)
    return NormalizedClause(head, tuple(body), guards, flows, origin, is_copy, cid)


def split_constraint(head: Atom | None, body, constraint) -> tuple[tuple, tuple]:
    """Split conjuncts into ``(guards, dataflows)``.

    A conjunct ``u = t`` becomes a dataflow ``x = t`` when one side is a bare
    variable ``x`` that is a head argument (a body argument if the head is
    ``false``), each argument is assigned at most once, and the other side
    only reads body arguments.  Facts and queries have no body arguments, so
    there the other side may read any variable that is not itself assigned
    in the clause.  When both sides qualify the head-argument side wins,
    then the left side.
    """
    head_args = {t.name for t in head.args} if head is not None else set()
    body_args = {t.name for a in body for t in a.args if isinstance(t, Var)}
    targets_ok = head_args if head is not None else body_args
    strict_sources = head is not None and bool(body)
    assigned: set[str] = set()
    read: set[str] = set()
    guards, flows = [], []

    def try_orient(x: Term, t: Term):
        if not isinstance(x, Var) or x.name not in targets_ok:
            return None
        if x.name in assigned or x.name in read:
            return None
        src = set(term_vars(t))
        if x.name in src or src & assigned:
            return None
        if strict_sources and not src <= body_args:
            return None
        return DataflowFormula(x.name, t)

    for k in constraint:
        flow = None
        if isinstance(k, Comparison) and k.rel == "=":
            cands = [(k.lhs, k.rhs), (k.rhs, k.lhs)]
            # prefer a head-argument target
            cands.sort(key=lambda p: not (isinstance(p[0], Var) and p[0].name in head_args))
            for x, t in cands:
                flow = try_orient(x, t)
                if flow is not None:
                    break
        if flow is None:
            guards.append(k)
        else:
            flow = DataflowFormula(flow.target, flow.source, k)
            assigned.add(flow.target)
            read.update(term_vars(flow.source))
            flows.append(flow)
    return tuple(guards), tuple(flows)


def write_copy_map(nsystem: NormalizedSystem) -> str:
    """Sidecar mapping ``copy-symbol<TAB>origin-symbol``, one per line."""
    return "".join(f"{k}\t{v}\n" for k, v in nsystem.copy_of.items())


def read_copy_map(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if line.strip():
            k, v = line.split("\t")
            out[k] = v
    return out
