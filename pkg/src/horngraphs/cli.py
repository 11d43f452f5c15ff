"""Command-line front end.

Exit status: 0 success, 1 usage error, 2 data error, 3 timeout or
enumeration/size cap.
"""
from __future__ import annotations

import argparse
import json
import os
import signal
import sys
from contextlib import contextmanager
from pathlib import Path

from . import chc, datasets, graphs, labels, rhygnn
from .normalize import normalize, write_copy_map
from .fm import FMCapExceeded
from .unfold import EnumerationCapError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_LIMIT = 0, 1, 2, 3
KINDS = {"cg": "CG", "cdhg": "CDHG", "pruned": "PRUNED"}
TASK_FLAGS = ("1", "2", "3", "4a", "4b", "5a", "5b")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _task(flag: str) -> str:
    flag = flag[1:] if flag[:1] in "tT" else flag
    if flag not in TASK_FLAGS:
        raise argparse.ArgumentTypeError(f"task must be one of {', '.join(TASK_FLAGS)}")
    return "T" + flag


@contextmanager
def _deadline(ms: int | None):
    """Raise TimeoutError after ``ms`` milliseconds of wall clock."""
    if not ms or not hasattr(signal, "setitimer"):
        yield
        return

    def fire(signum, frame):
        raise TimeoutError(f"exceeded {ms} ms")

    old = signal.signal(signal.SIGALRM, fire)
    signal.setitimer(signal.ITIMER_REAL, ms / 1000.0)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def _write(path: Path, text: str) -> None:
    """Atomic replace so a crash never leaves a half-written output."""
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _stem(path: str) -> str:
    name = Path(path).name
    return name[:-4] if name.endswith(".chc") else Path(path).stem


def _out_dir(args, src: str) -> Path:
    d = Path(args.out_dir) if args.out_dir else Path(src).parent
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load(path: str) -> chc.ClauseSystem:
    system = chc.parse_system(Path(path).read_text())
    chc.validate_system(system)
    return system


def _build(system, kind: str, node_cap: int):
    if kind == "CG":
        return graphs.build_cg(system, node_cap)
    if kind == "CDHG":
        return graphs.build_cdhg(normalize(system), node_cap)
    return graphs.build_pruned_rs_graph(system)


# -- subcommands ---------------------------------------------------------------


def cmd_parse(args) -> int:
    for path in args.files:
        sys.stdout.write(chc.print_system(_load(path)))
    return EXIT_OK


def cmd_normalize(args) -> int:
    for path in args.files:
        ns = normalize(_load(path))
        out = _out_dir(args, path)
        stem = _stem(path)
        _write(out / f"{stem}.normalized.chc", chc.print_system(ns.as_clause_system()))
        _write(out / f"{stem}.copies.tsv", write_copy_map(ns))
    return EXIT_OK


def cmd_graph(args) -> int:
    kind = KINDS[args.kind]
    for path in args.files:
        g = _build(_load(path), kind, args.node_cap)
        out = _out_dir(args, path)
        stem = _stem(path)
        _write(out / f"{stem}.{args.kind}.gv", graphs.emit_dot(g))
        _write(out / f"{stem}.{args.kind}.json", graphs.emit_json(g))
    return EXIT_OK


def cmd_label(args) -> int:
    kind = KINDS[args.graph]
    for path in args.files:
        system = _load(path)
        out = _out_dir(args, path)
        target = out / f"{_stem(path)}.{args.graph}.json"
        if target.exists():
            g, bundles = graphs.read_json(target.read_text())
        else:
            g, bundles = _build(system, kind, args.node_cap), []
        with _deadline(args.timeout_ms):
            bundle = labels.make_labels(system, g, args.task, depth=args.depth)
        bundles = [b for b in bundles if b.task != args.task] + [bundle]
        _write(target, graphs.emit_json(g, bundles))
    return EXIT_OK


def cmd_gen_dataset(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus = datasets.gen_corpus(args.count, args.templates or datasets.TEMPLATES, args.seed)
    names = []
    for system, record in corpus:
        name = f"{record['index']:04d}"
        names.append(name)
        _write(out / f"{name}.chc", chc.print_system(system))
        _write(out / f"{name}.meta.json", json.dumps(record, indent=1) + "\n")
    if len(names) >= 5:
        train, valid, test = datasets.split_corpus(names, datasets.SplitSpec(seed=args.seed))
    else:
        train, valid, test = names, [], []
    manifest = {"seed": args.seed, "train": train, "valid": valid, "test": test}
    _write(out / "splits.json", json.dumps(manifest, indent=1) + "\n")
    return EXIT_OK


def load_split(data_dir, names, kind: str, task: str, depth: int = 6,
               node_cap: int = graphs.DEFAULT_NODE_CAP):
    """(graph with self-loops, node-keyed labels) per instance.

    Instances whose label is undefined for ``task`` (no counterexample for
    the clause-set tasks) are skipped.
    """
    items = []
    for name in names:
        system = _load(str(Path(data_dir) / f"{name}.chc"))
        g = _build(system, kind, node_cap)
        try:
            bundle = labels.make_labels(system, g, task, depth=depth)
        except labels.NotRefutedError:
            continue
        items.append((graphs.add_self_loops(g), bundle))
    return items


def _manifest(data_dir) -> dict:
    path = Path(data_dir) / "splits.json"
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run gen-dataset first")
    return json.loads(path.read_text())


def _emit_metrics(metrics: rhygnn.Metrics, path) -> None:
    text = json.dumps(metrics.as_json(), indent=1) + "\n"
    if path:
        _write(Path(path), text)
    else:
        sys.stdout.write(text)


def cmd_train(args) -> int:
    kind = KINDS[args.graph]
    if kind == "PRUNED":
        raise UsageError("train supports --graph cg or cdhg")
    manifest = _manifest(args.data)
    split = {s: load_split(args.data, manifest[s], kind, args.task, args.depth)
             for s in ("train", "valid", "test")}
    cfg = rhygnn.TrainConfig(task=args.task, hidden=args.hidden, steps=args.steps,
                             max_epochs=args.epochs, patience=min(args.patience, args.epochs),
                             lr=args.lr, seed=args.seed)
    model = rhygnn.init_model(graphs.catalog(kind), cfg)
    best, hist = rhygnn.train(model, split["train"], split["valid"], cfg)
    rhygnn.save_checkpoint(best, args.model)
    metrics = rhygnn.evaluate(best, split["test"] or split["valid"])
    metrics.epochs_run = hist.epochs_run
    _emit_metrics(metrics, args.metrics)
    return EXIT_OK


def cmd_eval(args) -> int:
    model = rhygnn.load_checkpoint(args.model)
    manifest = _manifest(args.data)
    items = load_split(args.data, manifest[args.split], model.catalog.kind, model.config.task,
                       args.depth)
    _emit_metrics(rhygnn.evaluate(model, items), args.metrics)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    path = args.file or str(Path(__file__).parent / "data" / "running_example.chc")
    kind = KINDS[args.graph]
    system = _load(path)
    g = graphs.add_self_loops(_build(system, kind, graphs.DEFAULT_NODE_CAP))
    cfg = rhygnn.TrainConfig(task=args.task, hidden=args.hidden, steps=args.steps, seed=args.seed)
    model = rhygnn.init_model(graphs.catalog(kind), cfg)
    err = rhygnn.grad_check(model, g, labels.make_labels(system, g, args.task),
                            epsilon=args.epsilon)
    print(f"max relative error {err:.3e}")
    return EXIT_OK if err <= args.tolerance else EXIT_DATA


# -- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="horngraphs", description="Graph encodings of constrained Horn clauses.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def files(sp):
        sp.add_argument("files", nargs="+", metavar="FILE.chc")

    def outdir(sp):
        sp.add_argument("--out-dir", help="output directory (default: next to the input)")

    sp = sub.add_parser("parse", help="parse, validate and pretty-print")
    files(sp)
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("normalize", help="write NAME.normalized.chc and NAME.copies.tsv")
    files(sp)
    outdir(sp)
    sp.set_defaults(func=cmd_normalize)

    sp = sub.add_parser("graph", help="write NAME.KIND.gv and NAME.KIND.json")
    sp.add_argument("--kind", choices=sorted(KINDS), required=True)
    sp.add_argument("--node-cap", type=int, default=graphs.DEFAULT_NODE_CAP)
    files(sp)
    outdir(sp)
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("label", help="merge task labels into NAME.GRAPH.json")
    sp.add_argument("--task", type=_task, required=True)
    sp.add_argument("--graph", choices=("cg", "cdhg"), required=True)
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--timeout-ms", type=int, default=60_000)
    sp.add_argument("--node-cap", type=int, default=graphs.DEFAULT_NODE_CAP)
    files(sp)
    outdir(sp)
    sp.set_defaults(func=cmd_label)

    sp = sub.add_parser("gen-dataset", help="write a synthetic corpus and splits.json")
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--templates", nargs="+", choices=datasets.TEMPLATES)
    sp.set_defaults(func=cmd_gen_dataset)

    def model_flags(sp):
        sp.add_argument("--graph", choices=("cg", "cdhg"), default="cdhg")
        sp.add_argument("--task", type=_task, default="T1")
        sp.add_argument("--hidden", type=int, default=64)
        sp.add_argument("--steps", type=int, default=8)
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("train", help="train on a gen-dataset directory")
    sp.add_argument("--data", required=True)
    sp.add_argument("--model", required=True, help="checkpoint path to write")
    sp.add_argument("--metrics", help="metrics JSON path (default: stdout)")
    sp.add_argument("--epochs", type=int, default=500)
    sp.add_argument("--patience", type=int, default=100)
    sp.add_argument("--lr", type=float, default=1e-3)
    sp.add_argument("--depth", type=int, default=6)
    model_flags(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", help="evaluate a checkpoint on one split")
    sp.add_argument("--data", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--split", choices=("train", "valid", "test"), default="test")
    sp.add_argument("--metrics")
    sp.add_argument("--depth", type=int, default=6)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("gradcheck", help="finite-difference check of the gradients")
    sp.add_argument("--file", help="clause file (default: bundled running example)")
    sp.add_argument("--epsilon", type=float, default=1e-5)
    sp.add_argument("--tolerance", type=float, default=1e-4)
    model_flags(sp)
    sp.set_defaults(func=cmd_gradcheck, hidden=4, steps=2)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"horngraphs: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TimeoutError, EnumerationCapError, FMCapExceeded, graphs.GraphSizeError) as e:
        print(f"horngraphs: limit: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except (chc.ChcError, labels.NotRefutedError, rhygnn.NoTrainableDataError,
            rhygnn.EmptyTargetsError, datasets.TooFewItemsError, OSError, ValueError,
            KeyError) as e:
        print(f"horngraphs: data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
