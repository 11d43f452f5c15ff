"""Ground-truth labels for the five proxy tasks.

============  =============================================  ============
task          meaning                                        targets
============  =============================================  ============
T1            node is a relation-symbol argument             all nodes
T2            occurrences of the symbol over all clauses     rs nodes
T3            symbol lies on a cycle of transitions          rs nodes
T4a / T4b     argument has a lower / upper bound             rsa nodes
T5a / T5b     clause is in every / some minimal refutation   clause nodes
============  =============================================  ============

Labels are computed on the clause form each graph kind is built from:
the clauses as written for CG, the normalized system for CDHG.
"""
from __future__ import annotations

import math

from .chc import ClauseSystem
from .graphs import HornGraph, LabelBundle, build_pruned_rs_graph
from .normalize import NormalizedSystem, normalize
from .unfold import minimal_clause_sets, refute_bounded
from .zones import zone_least_solution

__all__ = [
    "LabelBundle", "NotRefutedError", "label_arguments", "count_rs_occurrences",
    "tarjan_scc", "scc_membership", "bound_labels", "mus_labels", "make_labels",
]


class NotRefutedError(RuntimeError):
    """No counterexample within the unfolding depth; T5 labels are undefined."""


def label_arguments(graph: HornGraph) -> LabelBundle:
    return LabelBundle("T1", {n.id: int(n.type == "rsa") for n in graph.nodes})


def _clauses(system):
    if isinstance(system, NormalizedSystem):
        return system.as_clause_system()
    return system


def count_rs_occurrences(system) -> LabelBundle:
    system = _clauses(system)
    counts = {q: 0 for q in system.signatures}
    for c in system.clauses:
        for a in c.atoms():
            counts[a.symbol] += 1
    return LabelBundle("T2", counts, "symbol")


def tarjan_scc(vertices, successors) -> list[list]:
    """Strongly connected components, iteratively (no recursion limit)."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out = []
    counter = 0
    for root in vertices:
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    out.append(comp)
    return out


def scc_membership(system) -> LabelBundle:
    """1 for symbols in a cyclic SCC of the transition graph (or with a self-loop)."""
    g = build_pruned_rs_graph(_clauses(system))
    succ: dict[int, list[int]] = {n.id: [] for n in g.nodes}
    for u, v in g.edges["TRANSITION"]:
        succ[u].append(v)
    cyclic = set()
    for comp in tarjan_scc([n.id for n in g.nodes], succ.__getitem__):
        if len(comp) > 1 or comp[0] in succ[comp[0]]:
            cyclic.update(comp)
    return LabelBundle("T3", {n.name: int(n.id in cyclic) for n in g.nodes if n.type == "rs"},
                       "symbol")


def bound_labels(nsystem, widening_delay: int = 2, symbols=None):
    """(T4a, T4b): whether each argument has a provable lower / upper bound.

    Unreachable symbols (bottom state) are bounded both ways.  ``symbols``
    restricts the output, e.g. to the original symbols for a CG.
    """
    if isinstance(nsystem, ClauseSystem):
        nsystem = normalize(nsystem)
    states = zone_least_solution(nsystem, widening_delay)
    lower, upper = {}, {}
    for q in (symbols if symbols is not None else nsystem.signatures):
        s = states[q]
        for i, x in enumerate(nsystem.canonical_args[q]):
            lower[(q, i)] = 1 if s is None else int(s.lower(x) != -math.inf)
            upper[(q, i)] = 1 if s is None else int(s.upper(x) != math.inf)
    return LabelBundle("T4a", lower, "argument"), LabelBundle("T4b", upper, "argument")


def mus_labels(system, max_depth: int, cap: int = 100_000):
    """(T5a, T5b): clause in the intersection / union of the minimal clause
    sets of counterexamples found within ``max_depth``."""
    derivations = refute_bounded(system, max_depth, cap)
    if not derivations:
        raise NotRefutedError(f"no counterexample within depth {max_depth}")
    sets = minimal_clause_sets(derivations)
    union = frozenset().union(*sets)
    inter = frozenset.intersection(*sets)
    ids = [c.clause_id for c in _clauses(system).clauses]
    return (LabelBundle("T5a", {i: int(i in inter) for i in ids}, "clause"),
            LabelBundle("T5b", {i: int(i in union) for i in ids}, "clause"))


def make_labels(system: ClauseSystem, graph: HornGraph, task: str, depth: int = 6,
                nsystem: NormalizedSystem | None = None) -> LabelBundle:
    """Node-keyed labels of ``task`` for a CG or CDHG built from ``system``."""
    if graph.kind == "CDHG":
        source = nsystem if nsystem is not None else normalize(system)
    else:
        source = system
    if task == "T1":
        return label_arguments(graph)
    if task == "T2":
        return count_rs_occurrences(source).on_graph(graph)
    if task == "T3":
        return scc_membership(source).on_graph(graph)
    if task in ("T4a", "T4b"):
        ns = source if isinstance(source, NormalizedSystem) else normalize(system)
        syms = None if graph.kind == "CDHG" else list(system.signatures)
        lo, hi = bound_labels(ns, symbols=syms)
        return (lo if task == "T4a" else hi).on_graph(graph)
    if task in ("T5a", "T5b"):
        inter, union = mus_labels(source, depth)
        return (inter if task == "T5a" else union).on_graph(graph)
    raise ValueError(f"unknown task {task!r}")
