# Exact centralities on small graphs, then how the four measures disagree on the training families.

import numpy as np
from scipy import stats

from centrality_gnn.datasets import TRAIN_FAMILIES, generate_graph
from centrality_gnn.graph import from_edge_list
from centrality_gnn.oracles import MEASURES, all_centralities, rank_label_matrix

np.set_printoptions(precision=3, suppress=True)

# a path with a pendant: 0-1-2-3 plus 1-4
g = from_edge_list(5, [(0, 1), (1, 2), (2, 3), (1, 4)])
for m, v in all_centralities(g).items():
    print(f"{m:<12}", v)

# labels for training: entry (i, j) is 1 when j outranks i
print(rank_label_matrix([0.1, 0.5, 0.9]))

# rank agreement between measures, one graph per family
rng = np.random.default_rng(0)
for family, params in TRAIN_FAMILIES.items():
    h = generate_graph(family, 64, params, rng)
    vals = all_centralities(h)
    tau = np.array([[stats.kendalltau(vals[a], vals[b]).statistic for b in MEASURES] for a in MEASURES])
    print(f"\n{family} (n={h.n}, m={h.m}) kendall tau between measures")
    print(tau)

# degree ties are common in sparse graphs; these pairs cannot be ordered by any structural model
for family in ("erdos-renyi", "powerlaw-tree"):
    h = generate_graph(family, 32, TRAIN_FAMILIES[family], rng)
    d = h.degrees()
    tied = (d[:, None] == d[None, :]).sum() - h.n
    print(f"{family}: {tied / (h.n * (h.n - 1)):.2f} of ordered vertex pairs tie on degree")
