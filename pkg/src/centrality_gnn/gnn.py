"""Message-passing embedding network: learned initial embedding, source/target
message MLPs and a layer-normalized LSTM update cell with ReLU activations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from .autodiff import Tensor
from .errors import NumericError, ShapeError, UsageError
from .optim import glorot_vector, xavier_uniform

LN_EPS = 1e-3
GATES = ("i", "g", "f", "o")  # input, candidate, forget, output

Layer = tuple[Tensor, Tensor]


@dataclass
class CellParams:
    """LSTM update cell. ``kernel`` maps ``[input, h]`` (3d) to four gate blocks (4d)."""

    kernel: Tensor
    bias: Tensor
    ln_gain: dict[str, Tensor]
    ln_bias: dict[str, Tensor]

    @property
    def d(self) -> int:
        return self.kernel.shape[1] // 4


@dataclass
class GnnParams:
    v_init: Tensor
    src_msg: list[Layer]
    tgt_msg: list[Layer]
    cell: CellParams
    d: int
    t_max: int

    def named_parameters(self) -> dict[str, Tensor]:
        out = {"gnn/v_init": self.v_init}
        for name, layers in (("src_msg", self.src_msg), ("tgt_msg", self.tgt_msg)):
            for k, (w, b) in enumerate(layers):
                out[f"gnn/{name}/{k}/w"] = w
                out[f"gnn/{name}/{k}/b"] = b
        out["gnn/cell/kernel"] = self.cell.kernel
        out["gnn/cell/bias"] = self.cell.bias
        for key in (*GATES, "c"):
            out[f"gnn/cell/ln_{key}/gain"] = self.cell.ln_gain[key]
            out[f"gnn/cell/ln_{key}/bias"] = self.cell.ln_bias[key]
        return out


def init_mlp(widths: list[int], rng) -> list[Layer]:
    """Xavier-uniform kernels and zero biases for consecutive ``widths``."""
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        w = xavier_uniform(fan_in, fan_out, rng)
        b = Tensor(np.zeros(fan_out), requires_grad=True)
        layers.append((w, b))
    return layers


def init_gnn_params(d: int, seed=0, t_max: int = 32) -> GnnParams:
    if d < 2:
        raise UsageError("embedding width d must be at least 2")
    rng = np.random.default_rng(seed)
    v_init = xavier_uniform(1, d, rng, shape=(d,))
    src = init_mlp([d, d, d, d], rng)
    tgt = init_mlp([d, d, d, d], rng)
    kernel = xavier_uniform(3 * d, 4 * d, rng)
    bias = glorot_vector(4 * d, rng)
    forget = GATES.index("f")
    bias.data[forget * d:(forget + 1) * d] += 1.0
    ln_gain = {k: Tensor(np.ones(d), requires_grad=True) for k in (*GATES, "c")}
    ln_bias = {k: Tensor(np.zeros(d), requires_grad=True) for k in (*GATES, "c")}
    return GnnParams(v_init, src, tgt, CellParams(kernel, bias, ln_gain, ln_bias), d, t_max)


def mlp_forward(layers: list[Layer], x) -> Tensor:
    """Affine + ReLU on every layer but the last, which stays linear."""
    h = ad.constant(x)
    for k, (w, b) in enumerate(layers):
        if h.shape[-1] != w.shape[0]:
            raise ShapeError(f"layer {k}: input width {h.shape[-1]} != kernel rows {w.shape[0]}")
        h = ad.add(ad.matmul(h, w), b)
        if k < len(layers) - 1:
            h = ad.relu(h)
    return h


@dataclass
class EmbeddingState:
    V: Tensor  # recurrent output, read by the heads
    V_h: Tensor  # cell memory


def lstm_step(cell: CellParams, x, state: EmbeddingState) -> EmbeddingState:
    """One layer-norm LSTM update.

    Each gate block is layer-normalized with its own gain/bias; the cell bias
    (which carries the +1 forget offset) is added after normalization so the
    offset is not removed by the mean subtraction.
    """
    d = cell.d
    z = ad.matmul(ad.concat([x, state.V], axis=1), cell.kernel)
    gate = {}
    for k, key in enumerate(GATES):
        block = ad.layer_norm(z[:, k * d:(k + 1) * d], cell.ln_gain[key], cell.ln_bias[key], LN_EPS)
        gate[key] = ad.add(block, cell.bias[k * d:(k + 1) * d])
    i = ad.sigmoid(gate["i"])
    f = ad.sigmoid(gate["f"])
    o = ad.sigmoid(gate["o"])
    candidate = ad.relu(gate["g"])
    c = ad.add(ad.mul(f, state.V_h), ad.mul(i, candidate))
    c = ad.layer_norm(c, cell.ln_gain["c"], cell.ln_bias["c"], LN_EPS)
    h = ad.mul(ad.relu(c), o)
    return EmbeddingState(h, c)


def _as_operator(M):
    if sp.issparse(M):
        return M.tocsr().astype(np.float64)
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"adjacency must be square, got {M.shape}")
    return sp.csr_matrix(M)


def message_passing_run(M, params: GnnParams, t_max: int | None = None, record: bool = False):
    """Refine vertex embeddings for ``t_max`` steps over adjacency ``M``.

    Every vertex starts from ``v_init`` with zero cell memory.  Each step sums
    ``src_msg`` messages through ``M`` and ``tgt_msg`` messages through ``M.T``
    and feeds their concatenation to the update cell.

    With ``record=True`` returns ``(V_final, [V^1, ..., V^{t_max+1}])`` where
    ``V^1`` is the initial (broadcast) embedding.
    """
    t_max = params.t_max if t_max is None else t_max
    M = _as_operator(M)
    MT = M.T.tocsr()
    n, d = M.shape[0], params.d
    V = ad.matmul(np.ones((n, 1)), ad.reshape(params.v_init, (1, d)))
    state = EmbeddingState(V, Tensor(np.zeros((n, d))))
    history = [state.V.data.copy()] if record else None
    for t in range(1, t_max + 1):
        a = ad.sparse_matmul(M, mlp_forward(params.src_msg, state.V))
        b = ad.sparse_matmul(MT, mlp_forward(params.tgt_msg, state.V))
        state = lstm_step(params.cell, ad.concat([a, b], axis=1), state)
        if not np.all(np.isfinite(state.V.data)):
            raise NumericError(f"non-finite vertex embedding at message-passing step {t}")
        if record:
            history.append(state.V.data.copy())
    if record:
        return state.V, history
    return state.V
