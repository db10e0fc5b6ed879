"""Decoders on top of the vertex embeddings and their training losses.

Two families:

* approximation heads (modes AN, AU, AM): a per-centrality MLP maps each
  embedding to a scalar and is trained with a mean squared error;
* comparison heads (mode RN): a per-centrality MLP reads a concatenated pair
  of embeddings and emits the logit that the second vertex outranks the first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ShapeError, UsageError
from .gnn import Layer, init_mlp, mlp_forward
from .oracles import MEASURES

MODES = ("AN", "AU", "AM", "RN")
APPROX_MODES = ("AN", "AU", "AM")
AM_RANGE_FLOOR = 1e-12


@dataclass
class HeadParams:
    mode: str
    centralities: tuple[str, ...]
    mlps: dict[str, list[Layer]]

    def named_parameters(self) -> dict[str, Tensor]:
        out = {}
        for c in self.centralities:
            for k, (w, b) in enumerate(self.mlps[c]):
                out[f"head/{self.mode}/{c}/{k}/w"] = w
                out[f"head/{self.mode}/{c}/{k}/b"] = b
        return out

    @property
    def multitask(self) -> bool:
        return len(self.centralities) == len(MEASURES)


def init_head_params(mode: str, centralities, d: int, seed=0) -> HeadParams:
    """One MLP per centrality: (d, d, 1) widths for approximation, (2d, 2d, 1) for RN."""
    if mode not in MODES:
        raise UsageError(f"unknown head mode {mode!r}; expected one of {MODES}")
    centralities = tuple(centralities)
    unknown = [c for c in centralities if c not in MEASURES]
    if unknown or not centralities or len(set(centralities)) != len(centralities):
        raise UsageError(f"invalid centrality set {centralities}")
    rng = np.random.default_rng(seed)
    width = 2 * d if mode == "RN" else d
    mlps = {c: init_mlp([width, width, width, 1], rng) for c in centralities}
    return HeadParams(mode, centralities, mlps)


def approx_forward(head: HeadParams, V, centrality: str | None = None):
    """Per-vertex scalar predictions, shape ``(n,)``.

    Returns a dict over the head's centralities unless ``centrality`` is given.
    """
    if head.mode not in APPROX_MODES:
        raise UsageError(f"approx_forward needs an approximation head, got {head.mode}")
    V = ad.constant(V)
    names = head.centralities if centrality is None else (centrality,)
    out = {c: ad.reshape(mlp_forward(head.mlps[c], V), (V.shape[0],)) for c in names}
    return out if centrality is None else out[centrality]


@dataclass
class ComparisonMatrix:
    """Entry (i, j) is the logit that vertex j outranks vertex i."""

    logits: Tensor

    @property
    def n(self) -> int:
        return self.logits.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        return ad.sigmoid(self.logits).data


def _pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.divmod(np.arange(n * n), n)
    return rows, cols


def cmp_forward(head: HeadParams, V, centrality: str | None = None):
    """Comparison logits for all n*n ordered pairs, diagonal included.

    ``logit[i, j] = cmp_c(concat(V[i], V[j]))``.
    """
    if head.mode != "RN":
        raise UsageError(f"cmp_forward needs an RN head, got {head.mode}")
    V = ad.constant(V)
    n = V.shape[0]
    rows, cols = _pair_indices(n)
    pairs = ad.concat([ad.take_rows(V, rows), ad.take_rows(V, cols)], axis=1)
    names = head.centralities if centrality is None else (centrality,)
    out = {
        c: ComparisonMatrix(ad.reshape(mlp_forward(head.mlps[c], pairs), (n, n))) for c in names
    }
    return out if centrality is None else out[centrality]


def rn_loss(cm: ComparisonMatrix, T) -> Tensor:
    """Mean binary cross entropy over all n*n entries, in the stable logit form."""
    T = np.asarray(T, dtype=np.float64)
    if T.shape != cm.logits.shape:
        raise ShapeError(f"label matrix {T.shape} does not match comparison matrix {cm.logits.shape}")
    return ad.bce_with_logits(cm.logits, T)


def mse(pred, target) -> Tensor:
    pred = ad.constant(pred)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"prediction {pred.shape} vs target {target.shape}")
    return ad.reduce_mean(ad.square(ad.sub(pred, target)))


def an_loss(pred, normalized_target) -> Tensor:
    return mse(pred, normalized_target)


def au_loss(pred, raw_target) -> Tensor:
    return mse(pred, raw_target)


def minmax_normalize(pred) -> Tensor:
    """Differentiable rescale to [0, 1]; a (near-)constant vector maps to zeros."""
    pred = ad.constant(pred)
    lo = ad.reduce_min(pred)
    hi = ad.reduce_max(pred)
    span = ad.sub(hi, lo)
    shifted = ad.sub(pred, lo)
    if span.data <= AM_RANGE_FLOOR * max(1.0, float(np.abs(pred.data).max())):
        return ad.mul(shifted, 0.0)
    return ad.div(shifted, span)


def am_loss(pred, normalized_target) -> Tensor:
    pred = ad.constant(pred)
    if pred.shape[0] < 2:
        raise ShapeError("am_loss needs at least two vertices")
    return mse(minmax_normalize(pred), normalized_target)


def approx_loss(mode: str, pred, target) -> Tensor:
    if mode == "AN":
        return an_loss(pred, target)
    if mode == "AU":
        return au_loss(pred, target)
    if mode == "AM":
        return am_loss(pred, target)
    raise UsageError(f"{mode} is not an approximation mode")


def comparison_from_scores(scores) -> np.ndarray:
    """Entry (i, j) is 1 iff ``scores[j] > scores[i]``; ties are 0 both ways."""
    s = np.asarray(scores, dtype=np.float64)
    return (s[None, :] > s[:, None]).astype(np.float64)


def binarize_comparison(cm: ComparisonMatrix | np.ndarray) -> np.ndarray:
    """1 where the comparator's probability exceeds one half (logit > 0)."""
    logits = cm.logits.data if isinstance(cm, ComparisonMatrix) else np.asarray(cm)
    return (logits > 0).astype(np.float64)
