# Follow vertex embeddings through message passing, projected on their first principal axis.
# Step 0 is one point (every vertex starts from the same learned vector); later steps spread
# vertices out roughly in eigenvector-centrality order. About 25 s on one core.

import numpy as np
from scipy import stats

from centrality_gnn.datasets import generate_dataset, preset_specs
from centrality_gnn.generators import connected_watts_strogatz
from centrality_gnn.gnn import message_passing_run
from centrality_gnn.metrics import pca_1d
from centrality_gnn.oracles import MEASURES, eigenvector_centrality
from centrality_gnn.training import TrainConfig, train_model

train = generate_dataset(preset_specs("desk-mixed"), "desk-mixed")  # all four training families
config = TrainConfig(d=16, t_max=8, epochs=50, batches_per_epoch=8, batch_size=8, centralities=MEASURES)
model, _ = train_model(config, train)

g = connected_watts_strogatz(32, 4, 0.25, seed=0)
ev = eigenvector_centrality(g)
_, history = message_passing_run(g.sparse_adjacency(), model.gnn, record=True)

order = np.argsort(ev)  # vertices from least to most central
for step, V in enumerate(history):
    p = pca_1d(V, ev)
    if p.degenerate:
        print(f"step {step}: all embeddings equal")
        continue
    rho = stats.spearmanr(p.values, np.log(ev)).statistic
    strip = "".join(" .:-=+*#%@"[min(9, int(x * 10))] for x in p.values[order])
    print(f"step {step}: spearman {rho:+.2f}  |{strip}|")
