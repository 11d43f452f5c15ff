"""Relational hypergraph neural network in numpy.

Every hyperedge ``e`` of relation ``r`` sends one message to each member
``v``: the concatenation of all member states, multiplied by a matrix that
depends on the relation and on ``v``'s position in ``e``::

    h_v^t = ReLU( sum_r sum_p sum_{e in E_v^{r,p}} W_{r,p}^t . concat(h_u^{t-1} | u in e) )

``h^0`` is a learned embedding of the node type.  A two-layer head maps the
final states of the task's target nodes to one logit (or value) each.
Gradients are derived by hand; :func:`grad_check` compares them with
central differences.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from .graphs import SELF, HornGraph, LabelBundle, NodeTypeCatalog

__all__ = [
    "TrainConfig", "RHyGNNModel", "Metrics", "GraphPlan", "EmptyTargetsError",
    "NoTrainableDataError", "init_model", "prepare", "forward", "loss_and_grads",
    "train", "evaluate", "grad_check", "save_checkpoint", "load_checkpoint",
    "REGRESSION_TASKS",
]

REGRESSION_TASKS = ("T2",)
HEAD_BIAS_INIT = 0.01


class EmptyTargetsError(ValueError):
    """The graph has no node to predict for this task; skip the instance."""


class NoTrainableDataError(ValueError):
    pass


@dataclass
class TrainConfig:
    task: str = "T1"
    hidden: int = 64
    steps: int = 8
    max_epochs: int = 500
    patience: int = 100
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 5.0
    seed: int = 0
    # smaller drops in validation loss do not reset patience; in float64 a
    # saturated loss near 1e-18 keeps shrinking by ~1e-26 forever
    min_delta: float = 1e-8

    def __post_init__(self):
        if self.patience > self.max_epochs:
            raise ValueError("patience must not exceed max_epochs")
        if self.min_delta < 0:
            raise ValueError("min_delta must be non-negative")

    @property
    def regression(self) -> bool:
        return self.task in REGRESSION_TASKS


@dataclass
class RHyGNNModel:
    catalog: NodeTypeCatalog
    config: TrainConfig
    params: dict = field(default_factory=dict)

    @property
    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def weight(self, t: int, rel: str, pos: int) -> np.ndarray:
        """W_{rel,pos} of message-passing step ``t`` (1-based), shape D x (arity*D)."""
        return self.params[f"mp{t}/{rel}/{pos}"]

    def copy(self) -> "RHyGNNModel":
        return RHyGNNModel(self.catalog, self.config, {k: v.copy() for k, v in self.params.items()})


def _glorot(rng, fan_out: int, fan_in: int) -> np.ndarray:
    s = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=(fan_out, fan_in))


def init_model(catalog: NodeTypeCatalog, config: TrainConfig) -> RHyGNNModel:
    if SELF not in catalog.relations:
        raise ValueError("catalog lacks the SELF relation")
    rng = np.random.default_rng(config.seed)
    d = config.hidden
    params = {"embedding": _glorot(rng, len(catalog.node_types), d)}
    for t in range(1, config.steps + 1):
        for rel, arity in catalog.relations.items():
            for p in range(arity):
                params[f"mp{t}/{rel}/{p}"] = _glorot(rng, d, arity * d)
    params["head/W1"] = _glorot(rng, d, d)
    # slightly positive so all-zero node states do not sit on the ReLU kink
    params["head/b1"] = np.full(d, HEAD_BIAS_INIT)
    params["head/w2"] = _glorot(rng, 1, d)[0]
    params["head/b2"] = np.zeros(1)
    return RHyGNNModel(catalog, config, params)


@dataclass
class GraphPlan:
    """Index structures of one graph, reused across epochs."""

    types: np.ndarray
    relations: list  # (rel, arity, edges (n_e, a), scatter (N, n_e*a))
    targets: np.ndarray
    labels: np.ndarray
    num_nodes: int


def _target_nodes(graph: HornGraph, task: str) -> list[int]:
    if task == "T1":
        return [n.id for n in graph.nodes]
    if task in ("T2", "T3"):
        return graph.nodes_of_type("rs")
    if task in ("T4a", "T4b"):
        return graph.nodes_of_type("rsa")
    if task in ("T5a", "T5b"):
        return graph.nodes_of_type("cla" if graph.kind == "CG" else "guard")
    raise ValueError(f"unknown task {task!r}")


def prepare(graph: HornGraph, labels: LabelBundle | None, catalog: NodeTypeCatalog,
            task: str) -> GraphPlan:
    if SELF not in graph.relations:
        raise ValueError("graph has no SELF edges; call add_self_loops first")
    n = graph.num_nodes
    types = np.array([catalog.type_index(node.type) for node in graph.nodes], dtype=np.int64)
    rels = []
    for rel, arity in catalog.relations.items():
        es = graph.edges.get(rel, ())
        if not es:
            continue
        e = np.asarray(es, dtype=np.int64).reshape(len(es), arity)
        flat = e.reshape(-1)
        scatter = sp.csr_matrix((np.ones(flat.size), (flat, np.arange(flat.size))),
                                shape=(n, flat.size))
        rels.append((rel, arity, e, scatter))
    if labels is None:
        targets = np.array(_target_nodes(graph, task), dtype=np.int64)
        y = np.zeros(len(targets))
    else:
        labels = labels.on_graph(graph)
        expected = set(_target_nodes(graph, task))
        keys = sorted(k for k in labels.values if k in expected)
        targets = np.array(keys, dtype=np.int64)
        y = np.array([float(labels.values[k]) for k in keys])
    if targets.size == 0:
        raise EmptyTargetsError(f"no {task} targets in graph")
    return GraphPlan(types, rels, targets, y, n)


def _stacked(model: RHyGNNModel, t: int, rel: str, arity: int) -> np.ndarray:
    return np.concatenate([model.params[f"mp{t}/{rel}/{p}"] for p in range(arity)], axis=0)


def _forward(model: RHyGNNModel, plan: GraphPlan):
    d = model.config.hidden
    h = model.params["embedding"][plan.types]
    cache = {"h0": h, "layers": []}
    for t in range(1, model.config.steps + 1):
        pre = np.zeros((plan.num_nodes, d))
        layer = []
        for rel, arity, e, scatter in plan.relations:
            x = h[e].reshape(len(e), arity * d)
            w = _stacked(model, t, rel, arity)
            msgs = x @ w.T  # block p is the message to the node at position p
            pre += scatter @ msgs.reshape(-1, d)
            layer.append((x, w))
        h = np.maximum(pre, 0.0)
        cache["layers"].append((pre, layer))
    z = h[plan.targets]
    a1 = z @ model.params["head/W1"].T + model.params["head/b1"]
    r1 = np.maximum(a1, 0.0)
    out = r1 @ model.params["head/w2"] + model.params["head/b2"][0]
    cache.update(z=z, a1=a1, r1=r1)
    return h, out, cache


def forward(model: RHyGNNModel, graph: HornGraph | GraphPlan, task: str | None = None):
    """Return (final node states, head outputs for the task's targets)."""
    plan = graph if isinstance(graph, GraphPlan) else prepare(
        graph, None, model.catalog, task or model.config.task)
    h, out, _ = _forward(model, plan)
    return h, out


def _loss(out: np.ndarray, y: np.ndarray, regression: bool):
    """Mean loss and its gradient with respect to ``out``."""
    n = len(y)
    if regression:
        diff = out - y
        return float(np.mean(diff ** 2)), 2.0 * diff / n
    # numerically stable sigmoid cross-entropy on logits
    loss = np.maximum(out, 0) - out * y + np.log1p(np.exp(-np.abs(out)))
    prob = 0.5 * (1.0 + np.tanh(0.5 * out))
    return float(np.mean(loss)), (prob - y) / n


def loss_and_grads(model: RHyGNNModel, graph: HornGraph | GraphPlan,
                   labels: LabelBundle | None = None):
    """Mean loss over the targets and exact gradients for every parameter."""
    plan = graph if isinstance(graph, GraphPlan) else prepare(
        graph, labels, model.catalog, model.config.task)
    p = model.params
    d = model.config.hidden
    h, out, cache = _forward(model, plan)
    loss, dout = _loss(out, plan.labels, model.config.regression)

    g = {}
    r1, a1, z = cache["r1"], cache["a1"], cache["z"]
    g["head/w2"] = r1.T @ dout
    g["head/b2"] = np.array([dout.sum()])
    da1 = np.outer(dout, p["head/w2"]) * (a1 > 0)
    g["head/W1"] = da1.T @ z
    g["head/b1"] = da1.sum(axis=0)
    dh = np.zeros_like(h)
    np.add.at(dh, plan.targets, da1 @ p["head/W1"])

    for t in range(model.config.steps, 0, -1):
        pre, layer = cache["layers"][t - 1]
        dpre = dh * (pre > 0)
        dh = np.zeros_like(dh)
        for (rel, arity, e, scatter), (x, w) in zip(plan.relations, layer):
            dmsgs = (scatter.T @ dpre).reshape(len(e), arity * d)
            dw = dmsgs.T @ x
            for q in range(arity):
                g[f"mp{t}/{rel}/{q}"] = dw[q * d:(q + 1) * d]
            dx = dmsgs @ w
            dh += scatter @ dx.reshape(-1, d)
    demb = np.zeros_like(p["embedding"])
    np.add.at(demb, plan.types, dh)
    g["embedding"] = demb
    for k, v in p.items():
        if k not in g:
            g[k] = np.zeros_like(v)  # relation absent from this graph
    return loss, g


def grad_check(model: RHyGNNModel, graph: HornGraph | GraphPlan, labels=None,
               epsilon: float = 1e-5, grads: dict | None = None) -> float:
    """Largest relative error between analytic and central-difference gradients.

    Relative error is ``|a - n| / max(|a|, |n|, 1e-6)`` per entry.  Pass
    ``grads`` to check a given gradient instead of recomputing it.
    """
    plan = graph if isinstance(graph, GraphPlan) else prepare(
        graph, labels, model.catalog, model.config.task)
    if grads is None:
        _, grads = loss_and_grads(model, plan)
    worst = 0.0
    for name, param in model.params.items():
        flat = param.reshape(-1)
        gflat = grads[name].reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + epsilon
            lp, _, _ = _loss_only(model, plan)
            flat[i] = old - epsilon
            lm, _, _ = _loss_only(model, plan)
            flat[i] = old
            num = (lp - lm) / (2 * epsilon)
            a = gflat[i]
            err = abs(a - num) / max(abs(a), abs(num), 1e-6)
            worst = max(worst, err)
    return worst


def _loss_only(model, plan):
    h, out, _ = _forward(model, plan)
    loss, _ = _loss(out, plan.labels, model.config.regression)
    return loss, h, out


@dataclass
class Metrics:
    task: str
    accuracy: float | None = None
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    mse: float | None = None
    dom: float | None = None
    loss: float | None = None
    epochs_run: int = 0
    train_loss: list = field(default_factory=list)
    valid_loss: list = field(default_factory=list)

    @property
    def confusion(self) -> list[int]:
        return [self.tp, self.fp, self.tn, self.fn]

    def as_json(self) -> dict:
        return {"task": self.task, "accuracy": self.accuracy, "mse": self.mse,
                "confusion": self.confusion, "dom": self.dom, "epochs_run": self.epochs_run}


class _Adam:
    def __init__(self, params: dict, cfg: TrainConfig):
        self.cfg = cfg
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        c = self.cfg
        norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
        scale = c.clip_norm / norm if norm > c.clip_norm else 1.0
        self.t += 1
        b1t = 1 - c.beta1 ** self.t
        b2t = 1 - c.beta2 ** self.t
        for k, g in grads.items():
            g = g * scale
            self.m[k] = c.beta1 * self.m[k] + (1 - c.beta1) * g
            self.v[k] = c.beta2 * self.v[k] + (1 - c.beta2) * g * g
            params[k] -= c.lr * (self.m[k] / b1t) / (np.sqrt(self.v[k] / b2t) + c.eps)


def _plans(model: RHyGNNModel, dataset) -> list[GraphPlan]:
    plans = []
    for item in dataset:
        if isinstance(item, GraphPlan):
            plans.append(item)
            continue
        graph, labels = item
        try:
            plans.append(prepare(graph, labels, model.catalog, model.config.task))
        except EmptyTargetsError:
            continue
    return plans


def _mean_loss(model, plans) -> float:
    total, count = 0.0, 0
    for plan in plans:
        loss, _, _ = _loss_only(model, plan)
        total += loss * len(plan.targets)
        count += len(plan.targets)
    return total / count


def train(model: RHyGNNModel, train_set, valid_set, config: TrainConfig | None = None,
          log=None):
    """Adam, one step per graph, early stopping on validation loss.

    Returns the best-validation model and a Metrics record whose
    ``train_loss`` / ``valid_loss`` hold the per-epoch curves.
    """
    cfg = config or model.config
    train_plans = _plans(model, train_set)
    valid_plans = _plans(model, valid_set) or train_plans
    if not train_plans:
        raise NoTrainableDataError("every training instance was skipped")
    rng = np.random.default_rng(cfg.seed)
    opt = _Adam(model.params, cfg)
    hist = Metrics(cfg.task)
    best, best_loss, since = model.copy(), np.inf, 0
    for epoch in range(cfg.max_epochs):
        total, count = 0.0, 0
        for i in rng.permutation(len(train_plans)):
            plan = train_plans[i]
            loss, grads = loss_and_grads(model, plan)
            opt.step(model.params, grads)
            total += loss * len(plan.targets)
            count += len(plan.targets)
        vloss = _mean_loss(model, valid_plans)
        if not np.isfinite(vloss) or not np.isfinite(total):
            raise FloatingPointError(f"non-finite loss in epoch {epoch + 1}")
        hist.train_loss.append(total / count)
        hist.valid_loss.append(vloss)
        hist.epochs_run = epoch + 1
        if vloss < best_loss - cfg.min_delta:
            best, best_loss, since = model.copy(), vloss, 0
        else:
            since += 1
        if log is not None:
            log(epoch + 1, total / count, vloss)
        if since >= cfg.patience:
            break
    hist.loss = best_loss
    return best, hist


def evaluate(model: RHyGNNModel, dataset, task: str | None = None) -> Metrics:
    """Accuracy / confusion counts / dominant-label ratio, or MSE for regression."""
    task = task or model.config.task
    plans = _plans(model, dataset)
    m = Metrics(task)
    outs, ys = [], []
    for plan in plans:
        _, out, _ = _forward(model, plan)
        outs.append(out)
        ys.append(plan.labels)
    out = np.concatenate(outs) if outs else np.zeros(0)
    y = np.concatenate(ys) if ys else np.zeros(0)
    if model.config.regression:
        m.mse = float(np.mean((out - y) ** 2)) if y.size else None
        return m
    pred = out > 0  # sigmoid(out) > 0.5
    truth = y > 0.5
    m.tp = int(np.sum(pred & truth))
    m.fp = int(np.sum(pred & ~truth))
    m.tn = int(np.sum(~pred & ~truth))
    m.fn = int(np.sum(~pred & truth))
    n = len(y)
    if n:
        m.accuracy = (m.tp + m.tn) / n
        pos = int(np.sum(truth))
        m.dom = max(pos, n - pos) / n
    return m


def catalog_hash(catalog: NodeTypeCatalog) -> str:
    blob = json.dumps([catalog.kind, list(catalog.node_types), catalog.relations], sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


CHECKPOINT_VERSION = 1


def save_checkpoint(model: RHyGNNModel, path) -> None:
    meta = {
        "version": CHECKPOINT_VERSION,
        "config": asdict(model.config),
        "catalog": {"kind": model.catalog.kind, "node_types": list(model.catalog.node_types),
                    "relations": model.catalog.relations},
        "catalog_hash": catalog_hash(model.catalog),
    }
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
                 **{k.replace("/", "|"): v for k, v in model.params.items()})


def load_checkpoint(path) -> RHyGNNModel:
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode())
        if meta["version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        params = {k.replace("|", "/"): data[k].copy() for k in data.files if k != "__meta__"}
    c = meta["catalog"]
    catalog = NodeTypeCatalog(c["kind"], tuple(c["node_types"]), dict(c["relations"]))
    if catalog_hash(catalog) != meta["catalog_hash"]:
        raise ValueError("catalog hash mismatch")
    return RHyGNNModel(catalog, TrainConfig(**meta["config"]), params)
