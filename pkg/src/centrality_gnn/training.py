"""Training loop, evaluation and size sweeps."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .datasets import Dataset, Instance
from .errors import NumericError, UsageError
from .gnn import GnnParams, init_gnn_params, message_passing_run
from .graph import disjoint_union
from .heads import (
    APPROX_MODES,
    MODES,
    HeadParams,
    approx_forward,
    approx_loss,
    binarize_comparison,
    cmp_forward,
    comparison_from_scores,
    init_head_params,
    rn_loss,
)
from .metrics import PairCounts, kendall_tau, pair_counts
from .optim import ADAM_BETA1, ADAM_BETA2, ADAM_EPS, ADAM_LR, ParamStore, adam_step
from .oracles import MEASURES, rank_label_matrix

TIE_POLICIES = ("strict", "index")


def label_matrix(values, ties: str = "strict") -> np.ndarray:
    """Pairwise targets from exact centralities.

    ``strict``: entry (i, j) is 1 iff ``values[j] > values[i]``; tied pairs are
    0 in both orientations.  ``index``: ties broken by vertex index.
    """
    if ties == "strict":
        return comparison_from_scores(values)
    if ties == "index":
        return rank_label_matrix(values)
    raise UsageError(f"unknown tie policy {ties!r}")


@dataclass
class TrainConfig:
    d: int = 64
    t_max: int = 32
    epochs: int = 32
    batches_per_epoch: int = 32
    batch_size: int = 32
    mode: str = "RN"
    centralities: tuple[str, ...] = MEASURES
    seed: int = 0
    lr: float = ADAM_LR
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    ties: str = "strict"

    def __post_init__(self):
        self.centralities = tuple(self.centralities)
        if self.mode not in MODES:
            raise UsageError(f"unknown mode {self.mode!r}")
        if not self.centralities or any(c not in MEASURES for c in self.centralities):
            raise UsageError(f"invalid centralities {self.centralities}")
        if len(set(self.centralities)) != len(self.centralities):
            raise UsageError("duplicate centralities")
        if self.ties not in TIE_POLICIES:
            raise UsageError(f"unknown tie policy {self.ties!r}")
        if min(self.d, self.t_max, self.batch_size, self.batches_per_epoch) < 1 or self.epochs < 0:
            raise UsageError("d, t_max, batch sizes must be positive and epochs non-negative")

    @property
    def multitask(self) -> bool:
        return len(self.centralities) == len(MEASURES)

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["centralities"] = list(self.centralities)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class EpochLog:
    epoch: int
    loss: dict[str, float]
    seconds: float
    probe_accuracy: float | None = None


@dataclass
class Model:
    """Parameters plus optimizer state; what a checkpoint holds."""

    config: TrainConfig
    gnn: GnnParams
    head: HeadParams
    store: ParamStore
    epochs_done: int = 0

    @classmethod
    def initialize(cls, config: TrainConfig) -> "Model":
        gnn = init_gnn_params(config.d, seed=[config.seed, 0], t_max=config.t_max)
        head = init_head_params(config.mode, config.centralities, config.d, seed=[config.seed, 1])
        params = {**gnn.named_parameters(), **head.named_parameters()}
        return cls(config, gnn, head, ParamStore(params))


def _targets(inst: Instance, c: str, mode: str) -> np.ndarray:
    if c not in inst.values:
        raise UsageError(f"instance {inst.source or '?'} has no {c} values")
    return inst.target(c, normalized=(mode != "AU"))


def batch_loss(gnn: GnnParams, head: HeadParams, instances, ties: str = "strict"):
    """Sum of per-graph, per-centrality losses for one disjoint-union batch.

    Returns ``(total, per_centrality)`` where ``per_centrality`` holds floats
    summed over the member graphs.
    """
    batch = disjoint_union([inst.graph for inst in instances])
    V = message_passing_run(batch.union.sparse_adjacency(), gnn)
    terms = []
    per_c = {c: 0.0 for c in head.centralities}
    preds = approx_forward(head, V) if head.mode in APPROX_MODES else None
    for k, inst in enumerate(instances):
        sl = batch.member_slice(k)
        if head.mode == "RN":
            cms = cmp_forward(head, V[sl])
            for c in head.centralities:
                loss = rn_loss(cms[c], label_matrix(inst.values[c], ties))
                terms.append(loss)
                per_c[c] += loss.item()
        else:
            for c in head.centralities:
                loss = approx_loss(head.mode, preds[c][sl], _targets(inst, c, head.mode))
                terms.append(loss)
                per_c[c] += loss.item()
    total = terms[0]
    for t in terms[1:]:
        total = ad.add(total, t)
    return total, per_c


def epoch_batches(n_items: int, config: TrainConfig, epoch: int) -> list[np.ndarray]:
    """Instance indices for one epoch: distinct within the epoch, reshuffled per epoch."""
    need = config.batches_per_epoch * config.batch_size
    if need > n_items:
        raise UsageError(f"epoch needs {need} distinct instances, dataset has {n_items}")
    rng = np.random.default_rng([config.seed, 2, epoch])
    order = rng.permutation(n_items)[:need]
    return [order[b * config.batch_size:(b + 1) * config.batch_size] for b in range(config.batches_per_epoch)]


def train(
    config: TrainConfig,
    dataset: Dataset,
    probe: Dataset | None = None,
    model: Model | None = None,
    callback=None,
) -> tuple[GnnParams, HeadParams, list[EpochLog]]:
    """Train per ``config`` and return the final parameters and epoch logs.

    Use :func:`train_model` to keep the optimizer state (checkpoints, resume).
    """
    model, logs = train_model(config, dataset, probe, model, callback)
    return model.gnn, model.head, logs


def train_model(config, dataset, probe=None, model=None, callback=None) -> tuple[Model, list[EpochLog]]:
    if len(dataset) == 0:
        raise UsageError("training dataset is empty")
    model = Model.initialize(config) if model is None else model
    logs: list[EpochLog] = []
    for epoch in range(model.epochs_done, config.epochs):
        t0 = time.perf_counter()
        sums = {c: 0.0 for c in config.centralities}
        for b, idx in enumerate(epoch_batches(len(dataset), config, epoch)):
            insts = [dataset[i] for i in idx]
            try:
                total, per_c = batch_loss(model.gnn, model.head, insts, config.ties)
            except NumericError as exc:
                raise NumericError(f"epoch {epoch}, batch {b}: {exc}") from exc
            if not np.isfinite(total.item()):
                raise NumericError(f"epoch {epoch}, batch {b}: non-finite loss {total.item()}")
            grads = model.store.grads_from(ad.backward(total))
            adam_step(model.store, grads, config.lr, config.beta1, config.beta2, config.eps)
            for c in sums:
                sums[c] += per_c[c] / len(insts)
        model.epochs_done = epoch + 1
        acc = None
        if probe is not None and len(probe):
            acc = evaluate(model.gnn, model.head, probe.subset(range(min(32, len(probe)))), config.ties).mean_accuracy()
        log = EpochLog(epoch, {c: s / config.batches_per_epoch for c, s in sums.items()}, time.perf_counter() - t0, acc)
        logs.append(log)
        if callback is not None:
            callback(model, log)
    return model, logs


# -- evaluation -------------------------------------------------------------------


@dataclass
class CentralityMetrics:
    precision: float
    recall: float
    tn_rate: float
    accuracy: float
    kendall_tau: float | None
    graphs: int
    # pair counts summed over graphs (the rates above are per-graph means)
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class MetricsReport:
    dataset: str
    mode: str
    per_centrality: dict[str, CentralityMetrics] = field(default_factory=dict)

    def mean_accuracy(self) -> float:
        return float(np.mean([m.accuracy for m in self.per_centrality.values()]))

    def average(self) -> CentralityMetrics:
        ms = list(self.per_centrality.values())
        taus = [m.kendall_tau for m in ms if m.kendall_tau is not None]
        return CentralityMetrics(
            float(np.mean([m.precision for m in ms])),
            float(np.mean([m.recall for m in ms])),
            float(np.mean([m.tn_rate for m in ms])),
            float(np.mean([m.accuracy for m in ms])),
            float(np.mean(taus)) if taus else None,
            max(m.graphs for m in ms),
            sum(m.tp for m in ms),
            sum(m.fp for m in ms),
            sum(m.tn for m in ms),
            sum(m.fn for m in ms),
        )

    def to_table(self) -> str:
        head = f"{'Centrality':<12} {'P':>6} {'R':>6} {'TN':>6} {'Acc':>6} {'tau':>7}"
        lines = [f"{self.dataset} ({self.mode})", head, "-" * len(head)]
        rows = list(self.per_centrality.items())
        if len(rows) > 1:
            rows.append(("average", self.average()))
        for name, m in rows:
            tau = "   n/a" if m.kendall_tau is None else f"{m.kendall_tau:7.3f}"
            lines.append(
                f"{name.capitalize():<12} {100 * m.precision:6.1f} {100 * m.recall:6.1f} "
                f"{100 * m.tn_rate:6.1f} {100 * m.accuracy:6.1f} {tau}"
            )
        return "\n".join(lines) + "\n"

    def to_records(self) -> list[dict]:
        return [
            {"dataset": self.dataset, "mode": self.mode, "centrality": c, **m.as_dict()}
            for c, m in self.per_centrality.items()
        ]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.to_records())


def predict(gnn: GnnParams, head: HeadParams, instances, batch_size: int = 32):
    """Per instance, per centrality: ``(binary comparison matrix, score vector)``."""
    out = []
    with ad.no_grad():
        for start in range(0, len(instances), batch_size):
            chunk = instances[start:start + batch_size]
            batch = disjoint_union([inst.graph for inst in chunk])
            V = message_passing_run(batch.union.sparse_adjacency(), gnn)
            preds = approx_forward(head, V) if head.mode in APPROX_MODES else None
            for k in range(len(chunk)):
                sl = batch.member_slice(k)
                res = {}
                if head.mode == "RN":
                    for c, cm in cmp_forward(head, V[sl]).items():
                        # score: how strongly each vertex is predicted to beat the others
                        res[c] = (binarize_comparison(cm), cm.probabilities.sum(axis=0))
                else:
                    for c in head.centralities:
                        scores = preds[c].data[sl]
                        res[c] = (comparison_from_scores(scores), scores)
                out.append(res)
    return out


def score_predictions(instances, predictions, centralities, ties: str = "strict", dataset="", mode=""):
    report = MetricsReport(dataset, mode)
    for c in centralities:
        rates, taus = [], []
        counts = np.zeros(4, dtype=np.int64)
        for inst, res in zip(instances, predictions):
            if c not in inst.values or inst.graph.n < 2:
                continue
            pred_matrix, scores = res[c]
            pc = pair_counts(pred_matrix, label_matrix(inst.values[c], ties))
            counts += (pc.tp, pc.fp, pc.tn, pc.fn)
            rates.append(pc.rates())
            tau = kendall_tau(scores, inst.values[c])
            if tau is not None:
                taus.append(tau)
        if not rates:
            continue
        report.per_centrality[c] = CentralityMetrics(
            float(np.mean([r["precision"] for r in rates])),
            float(np.mean([r["recall"] for r in rates])),
            float(np.mean([r["tn_rate"] for r in rates])),
            float(np.mean([r["accuracy"] for r in rates])),
            float(np.mean(taus)) if taus else None,
            len(rates),
            *(int(x) for x in counts),
        )
    return report


def evaluate(gnn: GnnParams, head: HeadParams, dataset: Dataset, ties: str = "strict") -> MetricsReport:
    """Pairwise P/R/TN/accuracy (off-diagonal) and Kendall tau, averaged over graphs."""
    instances = list(dataset.instances)
    preds = predict(gnn, head, instances)
    return score_predictions(instances, preds, head.centralities, ties, dataset.name, head.mode)


def sizes_sweep(gnn: GnnParams, head: HeadParams, dataset: Dataset, ties: str = "strict") -> list[dict]:
    """Accuracy per vertex-count bucket; buckets without graphs are omitted."""
    rows = []
    for n, bucket in dataset.by_size().items():
        report = evaluate(gnn, head, bucket, ties)
        row = {"size": n, "graphs": len(bucket)}
        row.update({c: m.accuracy for c, m in report.per_centrality.items()})
        row["average"] = report.mean_accuracy()
        rows.append(row)
    return rows


def sizes_csv(rows: list[dict], centralities) -> str:
    cols = ["size", "graphs", *centralities, "average"]
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(str(r[c]) if c in ("size", "graphs") else f"{r.get(c, float('nan')):.6f}" for c in cols))
    return "\n".join(lines) + "\n"


__all__ = [
    "TrainConfig",
    "EpochLog",
    "Model",
    "MetricsReport",
    "CentralityMetrics",
    "train",
    "train_model",
    "evaluate",
    "sizes_sweep",
    "label_matrix",
    "batch_loss",
    "PairCounts",
]
