"""Constrained Horn clauses over linear integer arithmetic.

Abstract syntax, a Prolog-style textual format and a printer for it::

    % comments run to the end of the line
    L(x,y,n) :- n >= 0, x = n, y = n.
    L(x,y,n) :- L(x',y',n'), x' != 0, x = x' - 1, y = y' - 1, n = n'.
    false :- L(x,y,n), x = 0, y != 0.

Variables start with a lowercase letter, relation symbols with an uppercase
letter; both may carry trailing primes.  ``false`` is the reserved head
keyword.  All values are immutable.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

__all__ = [
    "Var", "IntConst", "Apply", "Term", "Comparison", "BoolConst", "Constraint",
    "Atom", "Clause", "ClauseSystem", "ChcError", "ParseError", "ArityError",
    "NonlinearError", "ValidationError", "parse_system", "print_system",
    "print_clause", "print_term", "print_constraint", "validate_system",
    "term_vars", "constraint_vars", "clause_vars", "substitute_term",
    "substitute_constraint", "linear_form", "is_ground", "COMPARISONS",
    "TERM_OPS", "make_system",
]

COMPARISONS = ("=", "<=", "<", ">=", ">", "!=")
TERM_OPS = ("+", "-", "*")


class ChcError(ValueError):
    """Base class for clause-level errors."""


class ParseError(ChcError):
    def __init__(self, message: str, line: int, col: int, expected: str | None = None):
        self.line = line
        self.col = col
        self.expected = expected
        where = f"line {line}, column {col}"
        if expected:
            message = f"{message} (expected {expected})"
        super().__init__(f"{where}: {message}")


class ArityError(ChcError):
    def __init__(self, symbol: str, expected: int, got: int):
        self.symbol = symbol
        self.expected = expected
        self.got = got
        super().__init__(f"arity mismatch for {symbol}: expected {expected}, got {got}")


class NonlinearError(ChcError):
    pass


class ValidationError(ChcError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


# -- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class IntConst:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Apply:
    """``op`` applied to ``args``; ``+`` and ``*`` are binary, ``-`` unary or binary."""

    op: str
    args: tuple

    def __post_init__(self):
        if self.op not in TERM_OPS:
            raise ChcError(f"unknown term operator {self.op!r}")
        n = len(self.args)
        if self.op == "-" and n not in (1, 2) or self.op != "-" and n != 2:
            raise ChcError(f"operator {self.op!r} applied to {n} arguments")

    def __str__(self) -> str:
        return print_term(self)


Term = Union[Var, IntConst, Apply]


@dataclass(frozen=True)
class Comparison:
    rel: str
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if self.rel not in COMPARISONS:
            raise ChcError(f"unknown comparison {self.rel!r}")

    def __str__(self) -> str:
        return print_constraint(self)


@dataclass(frozen=True)
class BoolConst:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


Constraint = Union[Comparison, BoolConst]


@dataclass(frozen=True)
class Atom:
    symbol: str
    args: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.symbol
        return f"{self.symbol}({','.join(print_term(a) for a in self.args)})"


@dataclass(frozen=True)
class Clause:
    """``head <- body /\\ constraint``.  A ``None`` head stands for ``false``."""

    head: Atom | None
    body: tuple = ()
    constraint: tuple = ()
    clause_id: int = 0

    @property
    def is_query(self) -> bool:
        return self.head is None

    def atoms(self) -> Iterator[Atom]:
        if self.head is not None:
            yield self.head
        yield from self.body

    def __str__(self) -> str:
        return print_clause(self)


@dataclass(frozen=True)
class ClauseSystem:
    clauses: tuple = ()
    signatures: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)

    def symbols(self) -> list[str]:
        return list(self.signatures)

    def clause(self, clause_id: int) -> Clause:
        for c in self.clauses:
            if c.clause_id == clause_id:
                return c
        raise KeyError(clause_id)


def make_system(clauses: Iterable[Clause], renumber: bool = True) -> ClauseSystem:
    """Build a system, inferring signatures from first occurrences."""
    out = []
    sigs: dict[str, int] = {}
    for i, c in enumerate(clauses):
        if renumber:
            c = Clause(c.head, tuple(c.body), tuple(c.constraint), i)
        for a in c.atoms():
            sigs.setdefault(a.symbol, a.arity)
        out.append(c)
    return ClauseSystem(tuple(out), sigs)


# -- term utilities ----------------------------------------------------------


def term_vars(t: Term) -> Iterator[str]:
    """Variable names of ``t`` in left-to-right order (with repeats)."""
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, Apply):
        for a in t.args:
            yield from term_vars(a)


def constraint_vars(c: Constraint) -> Iterator[str]:
    if isinstance(c, Comparison):
        yield from term_vars(c.lhs)
        yield from term_vars(c.rhs)


def clause_vars(c: Clause) -> list[str]:
    """Distinct variables of a clause in order of first occurrence."""
    seen: dict[str, None] = {}
    for a in c.atoms():
        for t in a.args:
            for v in term_vars(t):
                seen.setdefault(v)
    for k in c.constraint:
        for v in constraint_vars(k):
            seen.setdefault(v)
    return list(seen)


def is_ground(t: Term) -> bool:
    return next(term_vars(t), None) is None


def substitute_term(t: Term, sub) -> Term:
    """Replace variables by ``sub[name]`` (a Term or a new name)."""
    if isinstance(t, Var):
        r = sub.get(t.name, t)
        return Var(r) if isinstance(r, str) else r
    if isinstance(t, Apply):
        return Apply(t.op, tuple(substitute_term(a, sub) for a in t.args))
    return t


def substitute_constraint(c: Constraint, sub) -> Constraint:
    if isinstance(c, Comparison):
        return Comparison(c.rel, substitute_term(c.lhs, sub), substitute_term(c.rhs, sub))
    return c


def linear_form(t: Term) -> tuple[dict[str, int], int]:
    """Return ``(coeffs, const)`` with ``t == sum(coeffs[v]*v) + const``.

    Zero coefficients are dropped.  Raises NonlinearError on a product of
    two non-ground factors.
    """
    if isinstance(t, IntConst):
        return {}, t.value
    if isinstance(t, Var):
        return {t.name: 1}, 0
    if t.op == "-" and len(t.args) == 1:
        co, k = linear_form(t.args[0])
        return {v: -c for v, c in co.items()}, -k
    lc, lk = linear_form(t.args[0])
    rc, rk = linear_form(t.args[1])
    if t.op == "*":
        if lc and rc:
            raise NonlinearError(f"nonlinear term {print_term(t)}")
        if lc:
            lc, lk, rc, rk = rc, rk, lc, lk
        return {v: lk * c for v, c in rc.items() if lk * c}, lk * rk
    sign = 1 if t.op == "+" else -1
    out = dict(lc)
    for v, c in rc.items():
        out[v] = out.get(v, 0) + sign * c
    return {v: c for v, c in out.items() if c}, lk + sign * rk


# -- printing ----------------------------------------------------------------


def _is_binary(t: Term, *ops: str) -> bool:
    return isinstance(t, Apply) and len(t.args) == 2 and t.op in ops


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, IntConst):
        return str(t.value)
    if len(t.args) == 1:
        a = t.args[0]
        return f"-{a.name}" if isinstance(a, Var) else f"-({print_term(a)})"
    lhs, rhs = t.args
    ls, rs = print_term(lhs), print_term(rhs)
    if t.op == "*":
        if _is_binary(lhs, "+", "-", "*"):
            ls = f"({ls})"
        if _is_binary(rhs, "+", "-"):
            rs = f"({rs})"
        return f"{ls} * {rs}"
    # sums re-parse as (a - b - ...) + (rest), so only these shapes need parens
    if _is_binary(lhs, "+"):
        ls = f"({ls})"
    if t.op == "-" and _is_binary(rhs, "+", "-"):
        rs = f"({rs})"
    return f"{ls} {t.op} {rs}"


def print_constraint(c: Constraint) -> str:
    if isinstance(c, BoolConst):
        return "true" if c.value else "false"
    return f"{print_term(c.lhs)} {c.rel} {print_term(c.rhs)}"


def print_clause(c: Clause) -> str:
    head = "false" if c.head is None else str(c.head)
    items = [str(a) for a in c.body] + [print_constraint(k) for k in c.constraint]
    if not items:
        return f"{head}."
    return f"{head} :- {', '.join(items)}."


def print_system(system: ClauseSystem) -> str:
    return "".join(print_clause(c) + "\n" for c in system.clauses)


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<imp>:-)
  | (?P<rel><=|>=|!=|<|>|=)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)
  | (?P<punct>[(),.+*-])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.sigs: dict[str, int] = {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {found}", t.line, t.col, expected)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.error(repr(text))

    def system(self) -> ClauseSystem:
        clauses = []
        while self.tok.kind != "eof":
            clauses.append(self.clause(len(clauses)))
        return ClauseSystem(tuple(clauses), dict(self.sigs))

    def clause(self, cid: int) -> Clause:
        t = self.tok
        if t.kind == "ident" and t.text == "false":
            self.i += 1
            head = None
        elif t.kind == "ident" and t.text[0].isupper():
            head = self.atom()
        else:
            self.error("clause head")
        body, constraint = [], []
        if self.accept(":-"):
            while True:
                item = self.item()
                (body if isinstance(item, Atom) else constraint).append(item)
                if not self.accept(","):
                    break
        self.expect(".")
        return Clause(head, tuple(body), tuple(constraint), cid)

    def atom(self) -> Atom:
        t = self.tok
        self.i += 1
        args = []
        if self.accept("("):
            if not self.accept(")"):
                args.append(self.term())
                while self.accept(","):
                    args.append(self.term())
                self.expect(")")
        expected = self.sigs.setdefault(t.text, len(args))
        if expected != len(args):
            raise ArityError(t.text, expected, len(args))
        return Atom(t.text, tuple(args))

    def item(self):
        t = self.tok
        if t.kind == "ident" and t.text[0].isupper():
            return self.atom()
        if t.kind == "ident" and t.text in ("true", "false"):
            self.i += 1
            return BoolConst(t.text == "true")
        lhs = self.term()
        if self.tok.kind != "rel":
            self.error("comparison operator")
        rel = self.tok.text
        self.i += 1
        return Comparison(rel, lhs, self.term())

    def term(self) -> Term:
        # a - b - c folds left; a '+' makes the remainder the right operand
        lhs = self.product()
        while self.tok.text == "-" and self.tok.kind == "punct":
            self.i += 1
            lhs = Apply("-", (lhs, self.product()))
        if self.accept("+"):
            return Apply("+", (lhs, self.term()))
        return lhs

    def product(self) -> Term:
        t = self.tok
        lhs = self.unary()
        if self.accept("*"):
            rhs = self.product()
            if not (is_ground(lhs) or is_ground(rhs)):
                raise NonlinearError(
                    f"line {t.line}, column {t.col}: nonlinear term "
                    f"{print_term(lhs)} * {print_term(rhs)}")
            return Apply("*", (lhs, rhs))
        return lhs

    def unary(self) -> Term:
        t = self.tok
        if self.accept("-"):
            if self.tok.kind == "int":
                v = int(self.tok.text)
                self.i += 1
                return IntConst(-v)
            return Apply("-", (self.unary(),))
        if t.kind == "int":
            self.i += 1
            return IntConst(int(t.text))
        if t.kind == "ident" and not t.text[0].isupper() and t.text not in ("true", "false"):
            self.i += 1
            return Var(t.text)
        if self.accept("("):
            inner = self.term()
            self.expect(")")
            return inner
        self.error("term")


def parse_system(text: str) -> ClauseSystem:
    """Parse clause text.  Clause ids follow textual order from 0."""
    return _Parser(text).system()


# -- validation --------------------------------------------------------------


def _nonlinear(t: Term) -> list[str]:
    if isinstance(t, Apply):
        bad = []
        if t.op == "*" and not (is_ground(t.args[0]) or is_ground(t.args[1])):
            bad.append(print_term(t))
        for a in t.args:
            bad += _nonlinear(a)
        return bad
    return []


def validate_system(system: ClauseSystem) -> None:
    """Raise ValidationError listing every violated invariant."""
    problems = []
    seen_ids = set()
    for c in system.clauses:
        if c.clause_id in seen_ids:
            problems.append(f"duplicate clause id {c.clause_id}")
        seen_ids.add(c.clause_id)
        for a in c.atoms():
            expected = system.signatures.get(a.symbol)
            if expected is None:
                problems.append(f"clause {c.clause_id}: undeclared relation symbol {a.symbol}")
            elif expected != a.arity:
                problems.append(
                    f"clause {c.clause_id}: arity mismatch for {a.symbol}: "
                    f"expected {expected}, got {a.arity}")
        terms = [t for a in c.atoms() for t in a.args]
        terms += [x for k in c.constraint if isinstance(k, Comparison) for x in (k.lhs, k.rhs)]
        for t in terms:
            for bad in _nonlinear(t):
                problems.append(f"clause {c.clause_id}: nonlinear term {bad}")
    if problems:
        raise ValidationError(problems)
