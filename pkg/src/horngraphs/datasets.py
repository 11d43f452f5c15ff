"""Synthetic clause-system corpora with known properties, and dataset splits.

Each template is a small parameterized program shape.  Instances record
their parameters plus any facts the shape forces: whether the query is
reachable (planted unsat, with the depth of the shortest counterexample)
and which arguments are bounded below / above.  A ``None`` bound fact
means the shape bounds the argument but the zone analysis cannot be
expected to prove it.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .chc import ClauseSystem, parse_system

__all__ = ["TEMPLATES", "ProgramTemplate", "SplitSpec", "TooFewItemsError", "instantiate",
           "gen_corpus", "split_corpus"]

TEMPLATES = ("counting-loop", "two-counter-loop", "branchy-chain", "mutual-recursion")


class TooFewItemsError(ValueError):
    pass


@dataclass
class ProgramTemplate:
    tag: str
    nvars: int = 3
    const_range: tuple = (1, 5)
    guard_polarity: bool = True
    planted_unsat: bool = False
    # shape knobs drawn from const_range
    const: int = 1
    cap: int | None = None
    chain: int = 3

    def __post_init__(self):
        if self.tag not in TEMPLATES:
            raise ValueError(f"unknown template {self.tag!r}")
        if not 2 <= self.nvars <= 6:
            raise ValueError("nvars must be within 2..6")


def _extra(prefix: str, k: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(1, k + 1)]


def _args(vs, prime=False) -> str:
    return ",".join(v + "'" * prime for v in vs)


def _counting_loop(t: ProgramTemplate):
    # with defaults: the decrement loop x = y = n, assert y == 0 on exit
    if t.nvars == 2:
        vs, n = ["x", "y"], None
    else:
        vs, n = ["x", "y"] + _extra("y", t.nvars - 3) + ["n"], "n"
    off = t.const if t.planted_unsat else 0
    src = n if n else "x"
    init = [] if n is None else ["n >= 0", "x = n"]
    if n is None:
        init.append("x >= 0")
    init.append(f"y = {src} + {off}" if off else f"y = {src}")
    init += [f"{v} = {src}" for v in vs[2:-1] if n]
    if t.cap is not None:
        init.append(f"{src} <= {t.cap}")
    guard = "x' != 0" if t.guard_polarity else "x' > 0"
    step = [f"{v} = {v}' - 1" for v in vs if v != n] + (["n = n'"] if n else [])
    args = _args(vs)
    text = (f"L({args}) :- {', '.join(init)}.\n"
            f"L({args}) :- L({_args(vs, True)}), {guard}, {', '.join(step)}.\n"
            f"false :- L({args}), x = 0, y != 0.\n")
    k = len(vs)
    facts = {"L": {"lower": [1] * k, "upper": [int(t.cap is not None)] * k}}
    return text, 2 if t.planted_unsat else None, facts


def _two_counter_loop(t: ProgramTemplate):
    passive = _extra("z", max(0, t.nvars - 3))
    vs = ["i", "j", "n"] + passive
    d = t.const
    init = ["i = 0", f"j = {d}" if not t.planted_unsat else f"j = {d + t.const}", "n >= 0"]
    init += [f"{z} >= 0" for z in passive]
    if t.cap is not None:
        init.append(f"n <= {t.cap}")
    guard = "i' < n'" if t.guard_polarity else "n' > i'"
    step = ["i = i' + 1", "j = j' + 1", "n = n'"] + [f"{z} = {z}'" for z in passive]
    text = (f"L({_args(vs)}) :- {', '.join(init)}.\n"
            f"L({_args(vs)}) :- L({_args(vs, True)}), {guard}, {', '.join(step)}.\n"
            f"E(a,b) :- L({_args(vs)}), i >= n, a = i, b = j.\n"
            f"false :- E(a,b), b != a + {d}.\n")
    bounded = int(t.cap is not None)
    facts = {
        "L": {"lower": [1] * len(vs), "upper": [bounded, bounded, bounded] + [0] * len(passive)},
        "E": {"lower": [1, 1], "upper": [bounded, bounded]},
    }
    return text, 3 if t.planted_unsat else None, facts


def _branchy_chain(t: ProgramTemplate):
    passive = _extra("z", max(0, t.nvars - 2))
    vs = ["x", "y"] + passive
    a0 = t.const
    m = t.chain
    thr = a0 + m // 2
    lines = [f"P0({_args(vs)}) :- x = {a0}, y >= 0" +
             (f", y <= {t.cap}" if t.cap is not None else "") + "."]
    keep = ["y = y'"] + [f"{z} = {z}'" for z in passive]
    for i in range(1, m):
        lo, hi = (f"x' >= {thr}", f"x' < {thr}") if t.guard_polarity else \
                 (f"x' < {thr}", f"x' >= {thr}")
        lines.append(f"P{i}({_args(vs)}) :- P{i - 1}({_args(vs, True)}), {lo}, x = x' + 1, "
                     + ", ".join(keep) + ".")
        lines.append(f"P{i}({_args(vs)}) :- P{i - 1}({_args(vs, True)}), {hi}, x = x' + 2, "
                     + ", ".join(keep) + ".")
    query = f"x >= {a0}" if t.planted_unsat else f"x < {a0}"
    lines.append(f"false :- P{m - 1}({_args(vs)}), {query}.")
    yb = int(t.cap is not None)
    facts = {f"P{i}": {"lower": [1, 1] + [0] * len(passive), "upper": [1, yb] + [0] * len(passive)}
             for i in range(m)}
    return "\n".join(lines) + "\n", m + 1 if t.planted_unsat else None, facts


def _mutual_recursion(t: ProgramTemplate):
    passive = _extra("z", max(0, t.nvars - 2))
    vs = ["x", "n"] + passive
    keep = ["n = n'"] + [f"{z} = {z}'" for z in passive]
    guard = "x' < n'" if t.guard_polarity else "n' > x'"
    init = ["x = 0", "n >= 0"] + ([f"n <= {t.cap}"] if t.cap is not None else [])
    query = "r >= 0" if t.planted_unsat else "r < 0"
    text = (f"P({_args(vs)}) :- {', '.join(init)}.\n"
            f"Q({_args(vs)}) :- P({_args(vs, True)}), {guard}, x = x' + 1, {', '.join(keep)}.\n"
            f"P({_args(vs)}) :- Q({_args(vs, True)}), x = x' + {t.const}, {', '.join(keep)}.\n"
            f"R(r) :- P({_args(vs)}), x >= n, r = x.\n"
            f"false :- R(r), {query}.\n")
    rest = [0] * (len(vs) - 2)
    b = int(t.cap is not None)
    facts = {"P": {"lower": [1, 1] + rest, "upper": [b, b] + rest},
             "Q": {"lower": [1, 1] + rest, "upper": [b, b] + rest},
             # true bound on r needs a second narrowing pass: not recorded
             "R": {"lower": [1], "upper": [0 if b == 0 else None]}}
    return text, 3 if t.planted_unsat else None, facts


_BUILDERS = {
    "counting-loop": _counting_loop,
    "two-counter-loop": _two_counter_loop,
    "branchy-chain": _branchy_chain,
    "mutual-recursion": _mutual_recursion,
}


def instantiate(t: ProgramTemplate) -> tuple[ClauseSystem, dict]:
    """System plus provenance for one template setting."""
    text, depth, facts = _BUILDERS[t.tag](t)
    record = {
        "template": t.tag,
        "params": asdict(t),
        "planted_unsat": t.planted_unsat,
        "known_depth": depth,
        "bound_facts": facts,
        "source": text,
    }
    record["params"]["const_range"] = list(t.const_range)
    return parse_system(text), record


def _draw(tag: str, rng: np.random.Generator, const_range=(1, 5)) -> ProgramTemplate:
    lo, hi = const_range
    return ProgramTemplate(
        tag=tag,
        nvars=int(rng.integers(2, 7)),
        const_range=tuple(const_range),
        guard_polarity=bool(rng.integers(2)),
        planted_unsat=bool(rng.random() < 0.3),
        const=int(rng.integers(lo, hi + 1)),
        cap=int(rng.integers(lo, hi + 1)) * 2 if rng.random() < 0.4 else None,
        chain=int(rng.integers(2, 5)),
    )


def gen_corpus(count: int, templates=TEMPLATES, seed: int = 0):
    """``count`` (system, provenance) pairs; item ``i`` depends only on (seed, i)."""
    if count < 1:
        raise ValueError("count must be at least 1")
    templates = tuple(templates)
    for tag in templates:
        if tag not in TEMPLATES:
            raise ValueError(f"unknown template {tag!r}")
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        tag = templates[int(rng.integers(len(templates)))]
        system, record = instantiate(_draw(tag, rng))
        record.update(index=i, seed=seed)
        out.append((system, record))
    return out


@dataclass
class SplitSpec:
    train: float = 0.6
    valid: float = 0.2
    test: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if abs(self.train + self.valid + self.test - 1.0) > 1e-9:
            raise ValueError("split ratios must sum to 1")


def split_corpus(items, spec: SplitSpec | None = None):
    """Shuffle by seed; valid/test get floor sizes, train the remainder."""
    spec = spec or SplitSpec()
    items = list(items)
    n = len(items)
    if n < 5:
        raise TooFewItemsError(f"need at least 5 items to split, got {n}")
    order = np.random.default_rng(spec.seed).permutation(n)
    nv = int(np.floor(spec.valid * n + 1e-9))
    nt = int(np.floor(spec.test * n + 1e-9))
    valid = [items[i] for i in order[:nv]]
    test = [items[i] for i in order[nv:nv + nt]]
    train = [items[i] for i in order[nv + nt:]]
    return train, valid, test
