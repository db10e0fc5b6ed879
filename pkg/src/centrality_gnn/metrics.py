"""Ranking metrics and the 1-D PCA projection of embeddings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class PairCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def rates(self) -> dict[str, float]:
        """Precision, recall, true-negative rate and accuracy; 0/0 counts as 0."""

        def frac(a, b):
            return a / b if b else 0.0

        return {
            "precision": frac(self.tp, self.tp + self.fp),
            "recall": frac(self.tp, self.tp + self.fn),
            "tn_rate": frac(self.tn, self.tn + self.fp),
            "accuracy": frac(self.tp + self.tn, self.total),
        }


def pair_counts(pred: np.ndarray, labels: np.ndarray) -> PairCounts:
    """Confusion counts over the off-diagonal ordered pairs of two 0/1 matrices."""
    pred = np.asarray(pred) > 0.5
    labels = np.asarray(labels) > 0.5
    if pred.shape != labels.shape or pred.ndim != 2 or pred.shape[0] != pred.shape[1]:
        raise InputError(f"need equal square matrices, got {pred.shape} and {labels.shape}")
    off = ~np.eye(pred.shape[0], dtype=bool)
    p, t = pred[off], labels[off]
    return PairCounts(
        tp=int(np.sum(p & t)),
        fp=int(np.sum(p & ~t)),
        tn=int(np.sum(~p & ~t)),
        fn=int(np.sum(~p & t)),
    )


def kendall_tau(pred, truth) -> float | None:
    """Kendall tau-b over unordered pairs; ``None`` when either vector is fully tied."""
    x = np.asarray(pred, dtype=np.float64)
    y = np.asarray(truth, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise InputError("kendall_tau needs two equal-length vectors of length >= 2")
    iu, ju = np.triu_indices(len(x), k=1)
    sx = np.sign(x[ju] - x[iu])
    sy = np.sign(y[ju] - y[iu])
    s = float(np.sum(sx * sy))
    nx = float(np.count_nonzero(sx))
    ny = float(np.count_nonzero(sy))
    if nx == 0 or ny == 0:
        return None
    # (C - D) / sqrt((C + D + T_pred) (C + D + T_truth)); nx = C + D + T_truth-only ties
    return s / np.sqrt(nx * ny)


@dataclass(frozen=True)
class Projection:
    values: np.ndarray
    degenerate: bool
    variance: float  # variance along the principal direction, before rescaling


def pca_1d(V, reference=None, tol: float = 1e-10, max_iter: int = 10_000) -> Projection:
    """Project rows of ``V`` on their first principal direction, rescaled to [0, 1].

    The direction comes from power iteration on the covariance matrix.  The
    sign is chosen so that the row with the largest ``reference`` value (or,
    without a reference, the row with the largest raw projection) lands at
    or above one half.  Identical rows give a degenerate all-1/2 projection.
    """
    V = np.asarray(getattr(V, "data", V), dtype=np.float64)
    n = V.shape[0]
    if n < 2:
        return Projection(np.full(n, 0.5), True, 0.0)
    X = V - V.mean(axis=0)
    scale = max(1.0, float(np.abs(V).max()))
    if float(np.abs(X).max()) <= 1e-12 * scale:
        return Projection(np.full(n, 0.5), True, 0.0)
    C = X.T @ X / n
    # deterministic start: the column of C with the largest norm
    w = C[:, int(np.argmax(np.linalg.norm(C, axis=0)))].copy()
    w /= np.linalg.norm(w)
    for _ in range(max_iter):
        nxt = C @ w
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            break
        nxt /= norm
        if nxt @ w < 0:
            nxt = -nxt
        done = np.abs(nxt - w).max() < tol
        w = nxt
        if done:
            break
    proj = X @ w
    variance = float(proj @ proj / n)
    lo, hi = proj.min(), proj.max()
    if hi - lo <= 1e-12 * scale:
        return Projection(np.full(n, 0.5), True, variance)
    out = (proj - lo) / (hi - lo)
    anchor = int(np.argmax(reference)) if reference is not None else int(np.argmax(np.abs(proj)))
    if reference is None:
        flip = proj[anchor] < 0
    else:
        flip = out[anchor] < 0.5
    if flip:
        out = 1.0 - out
    return Projection(out, False, variance)
