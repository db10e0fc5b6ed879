"""Parameter storage, Glorot/Xavier initialization and the Adam optimizer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor
from .errors import UsageError

ADAM_LR = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def xavier_uniform(fan_in: int, fan_out: int, seed=None, shape=None) -> Tensor:
    """Uniform on +-sqrt(6 / (fan_in + fan_out)); ``shape`` defaults to (fan_in, fan_out)."""
    if fan_in <= 0 or fan_out <= 0:
        raise UsageError("fans must be positive")
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    shape = (fan_in, fan_out) if shape is None else shape
    return Tensor(_rng(seed).uniform(-bound, bound, size=shape), requires_grad=True)


def glorot_vector(size: int, seed=None) -> Tensor:
    """Glorot-uniform for a 1-D variable, where both fans equal its length."""
    return xavier_uniform(size, size, seed, shape=(size,))


@dataclass
class ParamStore:
    """Named trainable tensors plus Adam moments and the shared step counter."""

    params: dict[str, Tensor]
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    def __post_init__(self):
        for name, p in self.params.items():
            self.m.setdefault(name, np.zeros_like(p.data))
            self.v.setdefault(name, np.zeros_like(p.data))

    def __getitem__(self, name: str) -> Tensor:
        return self.params[name]

    def __iter__(self):
        return iter(self.params)

    def __len__(self):
        return len(self.params)

    def grads_from(self, leaf_grads: dict[Tensor, np.ndarray]) -> dict[str, np.ndarray]:
        """Translate a :func:`backward` result into a name-keyed map.

        Parameters the loss does not touch get a zero gradient.
        """
        return {
            name: leaf_grads.get(p, np.zeros_like(p.data)) for name, p in self.params.items()
        }

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}


def adam_step(
    store: ParamStore,
    grads: dict[str, np.ndarray],
    lr: float = ADAM_LR,
    beta1: float = ADAM_BETA1,
    beta2: float = ADAM_BETA2,
    eps: float = ADAM_EPS,
) -> ParamStore:
    """One bias-corrected Adam update, applied in place; returns ``store``."""
    missing = [name for name in store.params if name not in grads]
    if missing:
        raise UsageError(f"no gradient for parameter(s): {', '.join(missing)}")
    store.step += 1
    t = store.step
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    for name, p in store.params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != p.data.shape:
            raise UsageError(f"gradient for {name} has shape {g.shape}, expected {p.data.shape}")
        m = store.m[name] = beta1 * store.m[name] + (1.0 - beta1) * g
        v = store.v[name] = beta2 * store.v[name] + (1.0 - beta2) * (g * g)
        p.data = p.data - lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return store
