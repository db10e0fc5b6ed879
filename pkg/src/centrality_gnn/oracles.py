"""Exact centrality measures and the rank-label matrices used as targets.

All four measures follow the "larger is more central" convention.  Values are
returned as plain float64 arrays; :class:`CentralityVector` bundles one with
its metadata where that is useful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import ConvergenceError, InputError
from .graph import Graph

MEASURES = ("degree", "betweenness", "closeness", "eigenvector")

EIGENVECTOR_TOL = 1e-6
EIGENVECTOR_MAX_ITER = 1000


@dataclass(frozen=True)
class CentralityVector:
    measure: str
    values: np.ndarray
    normalized: bool

    def __len__(self):
        return len(self.values)


def degree_centrality(g: Graph, normalized: bool = True) -> np.ndarray:
    deg = g.degrees().astype(np.float64)
    if normalized:
        if g.n < 2:
            raise InputError("normalized degree needs n >= 2")
        deg /= g.n - 1
    return deg


def distance_matrix(g: Graph) -> np.ndarray:
    """All-pairs hop distances; ``inf`` marks unreachable pairs."""
    return shortest_path(g.sparse_adjacency(), method="D", unweighted=True, directed=False)


def betweenness_centrality(g: Graph, normalized: bool = True, chunk: int = 256) -> np.ndarray:
    """Brandes' dependency accumulation over BFS shortest paths.

    Sources are processed ``chunk`` at a time, level by level, so each BFS
    layer becomes one sparse product instead of a Python loop over vertices.
    """
    n = g.n
    if normalized and n < 3:
        raise InputError("normalized betweenness needs n >= 3")
    A = g.sparse_adjacency()
    dist = distance_matrix(g)
    finite = np.isfinite(dist)
    level = np.where(finite, dist, -1).astype(np.int64)
    bc = np.zeros(n)

    for start in range(0, n, chunk):
        lv = level[start:start + chunk]
        depth = int(lv.max())
        rows = np.arange(lv.shape[0])
        sigma = np.zeros(lv.shape, dtype=np.float64)
        sigma[rows, rows + start] = 1.0
        # path counts, layer by layer away from each source
        for ell in range(1, depth + 1):
            prev = np.where(lv == ell - 1, sigma, 0.0)
            sigma = np.where(lv == ell, (A.T @ prev.T).T, sigma)
        # dependencies, layer by layer back towards each source
        delta = np.zeros_like(sigma)
        safe_sigma = np.where(sigma > 0, sigma, 1.0)
        for ell in range(depth - 1, 0, -1):
            coeff = np.where(lv == ell + 1, (1.0 + delta) / safe_sigma, 0.0)
            pulled = (A @ coeff.T).T
            delta = np.where(lv == ell, sigma * pulled, delta)
        bc += delta.sum(axis=0)

    bc /= 2.0
    if normalized:
        bc /= (n - 1) * (n - 2) / 2.0
    return bc


def closeness_centrality(g: Graph, normalized: bool = True) -> np.ndarray:
    """Reciprocal mean distance to reachable vertices.

    The normalized form scales by the reachable fraction ``|R|/(n-1)`` so that
    vertices in small components are not over-rated.  Isolated vertices get 0.
    """
    if g.n < 2:
        raise InputError("closeness needs n >= 2")
    dist = distance_matrix(g)
    np.fill_diagonal(dist, np.inf)
    finite = np.isfinite(dist)
    reach = finite.sum(axis=1).astype(np.float64)
    total = np.where(finite, dist, 0.0).sum(axis=1)
    out = np.zeros(g.n)
    ok = total > 0
    out[ok] = reach[ok] / total[ok]
    if normalized:
        out *= reach / (g.n - 1)
    return out


def eigenvector_centrality(
    g: Graph,
    tol: float = EIGENVECTOR_TOL,
    max_iter: int = EIGENVECTOR_MAX_ITER,
    normalized: bool = True,
) -> np.ndarray:
    """Dominant eigenvector of the adjacency matrix by power iteration.

    Iterates with ``M + I``: same eigenvectors, but the shift keeps bipartite
    graphs (all trees) from oscillating between ``+lambda`` and ``-lambda``.
    Stops once the L1 change falls below ``n * tol`` and the eigen-residual
    ``max|A x - lambda x|`` falls below ``tol``; the change test alone lets the
    residual grow with lambda.  The unnormalized form is the unit eigenvector
    scaled by its Rayleigh quotient.
    """
    if g.m == 0:
        raise InputError("eigenvector centrality needs at least one edge")
    A = g.sparse_adjacency()
    n = g.n
    x = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        prev = x
        Ax = A @ x
        x = Ax + x
        x /= np.linalg.norm(x)
        if np.abs(x - prev).sum() < n * tol:
            Ax = A @ x
            if np.abs(Ax - (x @ Ax) * x).max() < tol:
                break
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")
    x = np.abs(x)
    x /= np.linalg.norm(x)
    if normalized:
        return x
    return float(x @ (A @ x)) * x


_ORACLES = {
    "degree": degree_centrality,
    "betweenness": betweenness_centrality,
    "closeness": closeness_centrality,
    "eigenvector": eigenvector_centrality,
}


def centrality(g: Graph, measure: str, normalized: bool = True) -> CentralityVector:
    try:
        fn = _ORACLES[measure]
    except KeyError:
        raise InputError(f"unknown centrality {measure!r}; expected one of {MEASURES}") from None
    return CentralityVector(measure, fn(g, normalized=normalized), normalized)


def all_centralities(g: Graph, normalized: bool = True) -> dict[str, np.ndarray]:
    """Every measure for ``g``. Eigenvector failures propagate."""
    return {m: _ORACLES[m](g, normalized=normalized) for m in MEASURES}


def rank_label_matrix(values) -> np.ndarray:
    """Strict total-order labels: entry (i, j) is 1 iff vertex j outranks i.

    Equal values are ordered by vertex index, so ties never leave a pair
    unlabelled.
    """
    v = np.asarray(values.values if isinstance(values, CentralityVector) else values, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise InputError("rank labels need finite values")
    idx = np.arange(len(v))
    greater = v[None, :] > v[:, None]
    tie = (v[None, :] == v[:, None]) & (idx[None, :] > idx[:, None])
    return (greater | tie).astype(np.float64)
