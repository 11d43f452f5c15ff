"""Graph encodings of constrained Horn clauses and a relational hypergraph
network trained on proxy tasks with exactly computable labels."""

from .chc import (Atom, Clause, ClauseSystem, ParseError, ValidationError, parse_system,
                  print_system, validate_system)
from .datasets import SplitSpec, gen_corpus, split_corpus
from .graphs import (HornGraph, LabelBundle, add_self_loops, build_cdhg, build_cg,
                     build_pruned_rs_graph, catalog, emit_dot, emit_json, read_json)
from .labels import (bound_labels, count_rs_occurrences, label_arguments, make_labels,
                     mus_labels, scc_membership)
from .normalize import NormalizedSystem, normalize
from .rhygnn import TrainConfig, evaluate, forward, grad_check, init_model, train

__version__ = "0.1.0"

__all__ = [
    "Atom", "Clause", "ClauseSystem", "ParseError", "ValidationError", "parse_system",
    "print_system", "validate_system", "SplitSpec", "gen_corpus", "split_corpus", "HornGraph",
    "LabelBundle", "add_self_loops", "build_cdhg", "build_cg", "build_pruned_rs_graph",
    "catalog", "emit_dot", "emit_json", "read_json", "bound_labels", "count_rs_occurrences",
    "label_arguments", "make_labels", "mus_labels", "scc_membership", "NormalizedSystem",
    "normalize", "TrainConfig", "evaluate", "forward", "grad_check", "init_model", "train",
]
