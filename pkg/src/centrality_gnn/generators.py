"""Seeded random graph families and dataset assembly.

Every generator takes an integer seed or a ``numpy.random.Generator``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import GenerationError, InputError
from .graph import Graph, from_edge_list, is_connected

FAMILIES = (
    "erdos-renyi",
    "powerlaw-tree",
    "watts-strogatz",
    "holme-kim",
    "barabasi-albert",
    "shell",
)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def erdos_renyi(n: int, p: float, seed=None) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise InputError(f"edge probability must lie in [0, 1], got {p}")
    rng = _rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return Graph(n, tuple(zip(iu[keep].tolist(), ju[keep].tolist())))


def _prufer_decode(seq: list[int], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    import heapq

    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    u, w = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, w))
    return edges


def powerlaw_degree_sequence(n: int, gamma: float, rng, tries: int) -> list[int]:
    """Tree degree sequence with a power-law tail, summing to ``2(n-1)``.

    Draws ``round(x)`` for continuous power-law ``x >= 1`` (capped at ``n-1``),
    then keeps swapping one random entry for a fresh draw until the sum fits.
    """

    def draw(size):
        x = (1.0 - rng.random(size)) ** (-1.0 / (gamma - 1.0))
        return np.minimum(np.rint(x), n - 1).astype(np.int64)

    seq = draw(n)
    target = 2 * (n - 1)
    for _ in range(tries):
        if seq.sum() == target:
            return seq.tolist()
        seq[rng.integers(n)] = draw(1)[0]
    if seq.sum() == target:
        return seq.tolist()
    raise GenerationError(f"no power-law tree degree sequence for n={n} within {tries} tries")


def powerlaw_tree(n: int, gamma: float = 3.0, seed=None, tries: int = 10_000) -> Graph:
    """Random tree whose degree sequence follows a power law with exponent ``gamma``.

    The tree is assembled from a shuffled Prüfer sequence in which vertex v
    appears ``deg(v) - 1`` times, so the degree sequence is met exactly.
    """
    if gamma <= 1:
        raise InputError("gamma must exceed 1")
    if tries < 1:
        raise InputError("tries must be at least 1")
    rng = _rng(seed)
    if n == 1:
        return Graph(1)
    if n == 2:
        return Graph(2, ((0, 1),))
    degrees = powerlaw_degree_sequence(n, gamma, rng, tries)
    seq = np.repeat(np.arange(n), np.asarray(degrees) - 1)
    rng.shuffle(seq)
    return from_edge_list(n, _prufer_decode(seq.tolist(), n))


def watts_strogatz(n: int, k: int, p: float, seed=None) -> Graph:
    """Ring lattice with ``k`` nearest neighbours; each lattice edge rewired with probability ``p``."""
    if k % 2 or k >= n:
        raise InputError(f"need even k < n, got k={k}, n={n}")
    rng = _rng(seed)
    adj = [set() for _ in range(n)]
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in adj[u] or rng.random() >= p:
                continue
            if len(adj[u]) >= n - 1:
                continue
            w = int(rng.integers(n))
            while w == u or w in adj[u]:
                w = int(rng.integers(n))
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    return from_edge_list(n, [(u, v) for u in range(n) for v in adj[u] if u < v])


def connected_watts_strogatz(n: int, k: int = 4, p: float = 0.25, tries: int = 100, seed=None) -> Graph:
    rng = _rng(seed)
    for _ in range(tries):
        g = watts_strogatz(n, k, p, rng)
        if is_connected(g):
            return g
    raise GenerationError(f"no connected Watts-Strogatz graph (n={n}, k={k}, p={p}) in {tries} tries")


def _random_subset(pool: list[int], m: int, rng) -> list[int]:
    chosen: list[int] = []
    seen = set()
    while len(chosen) < m:
        x = pool[int(rng.integers(len(pool)))]
        if x not in seen:
            seen.add(x)
            chosen.append(x)
    return chosen


def holme_kim(n: int, m: int = 4, p: float = 0.1, seed=None) -> Graph:
    """Preferential attachment with triad closure.

    Growth starts from ``m`` isolated vertices.  Each new vertex makes ``m``
    links; after each link, with probability ``p`` the next link closes a
    triangle through a random neighbour of the previous target.  Every new
    vertex ends with exactly ``m`` distinct neighbours, so there are
    ``(n - m) * m`` edges for any ``p``.
    """
    if not 1 <= m < n:
        raise InputError(f"need 1 <= m < n, got m={m}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise InputError(f"triad probability must lie in [0, 1], got {p}")
    rng = _rng(seed)
    adj = [set() for _ in range(n)]
    repeated = list(range(m))
    for source in range(m, n):
        targets = _random_subset(repeated, m, rng)
        # popped from the end, as a stack
        target = targets.pop()
        adj[source].add(target)
        adj[target].add(source)
        repeated.append(target)
        count = 1
        while count < m:
            if p > 0 and rng.random() < p:
                options = sorted(w for w in adj[target] if w != source and w not in adj[source])
                if options:
                    w = options[int(rng.integers(len(options)))]
                    adj[source].add(w)
                    adj[w].add(source)
                    repeated.append(w)
                    count += 1
                    continue
            target = targets.pop()
            if target in adj[source]:
                # already linked by a triad step; draw a fresh preferential target
                target = _random_subset([x for x in repeated if x not in adj[source]], 1, rng)[0]
            adj[source].add(target)
            adj[target].add(source)
            repeated.append(target)
            count += 1
        repeated.extend([source] * m)
    return from_edge_list(n, [(u, v) for u in range(n) for v in adj[u] if u < v])


def barabasi_albert(n: int, m: int = 4, seed=None) -> Graph:
    """Preferential attachment from an ``m``-vertex edgeless core; ``(n-m)*m`` edges."""
    return holme_kim(n, m, 0.0, seed)


def _shell_sizes(n_target: int) -> list[int]:
    sizes = []
    total = 1
    i = 1
    while True:
        s = int(round(math.pi * i))
        if total + s > n_target:
            break
        sizes.append(s)
        total += s
        i += 1
    return sizes


def shell_graph(n_target: int, seed=None) -> Graph:
    """Hub plus concentric cycles; shell i holds ``round(pi*i)`` vertices.

    Each vertex links to the angularly nearest vertex of the next inner shell.
    The construction is deterministic; ``seed`` is accepted for a uniform
    generator signature.
    """
    if n_target < 4:
        raise InputError("shell graphs need n_target >= 4")
    sizes = _shell_sizes(n_target)
    edges = []
    starts = [0]
    inner_start, inner_size = 0, 1
    nxt = 1
    for s in sizes:
        start = nxt
        for j in range(s):
            edges.append((start + j, start + (j + 1) % s))
            nearest = int(round(j / s * inner_size)) % inner_size
            edges.append((start + j, inner_start + nearest))
        starts.append(start)
        inner_start, inner_size = start, s
        nxt = start + s
    return from_edge_list(nxt, edges)


def shell_sizes_total(n_target: int) -> int:
    return 1 + sum(_shell_sizes(n_target))
