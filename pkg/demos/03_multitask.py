# One shared embedding network, four comparison heads. Then: how accuracy holds up on larger graphs.
# About 45 s on one core.

from centrality_gnn.datasets import TRAIN_FAMILIES, GeneratorSpec, generate_dataset, preset_specs
from centrality_gnn.oracles import MEASURES
from centrality_gnn.training import TrainConfig, evaluate, sizes_csv, sizes_sweep, train_model

train = generate_dataset(preset_specs("desk"), "desk")
test = generate_dataset(preset_specs("desk-test"), "desk-test")

config = TrainConfig(d=16, t_max=8, epochs=50, batches_per_epoch=8, batch_size=8, centralities=MEASURES)
model, logs = train_model(config, train)
print("final losses:", {c: round(v, 4) for c, v in logs[-1].loss.items()})
print(evaluate(model.gnn, model.head, test).to_table())

# trained on n <= 32; evaluate at up to 4x that
specs = [
    GeneratorSpec(f, dict(TRAIN_FAMILIES[f]), (n, n), 10, 10 * n + k)
    for n in (16, 32, 64, 96, 128)
    for k, f in enumerate(("erdos-renyi", "powerlaw-tree"))
]
rows = sizes_sweep(model.gnn, model.head, generate_dataset(specs, "sizes"))
print(sizes_csv(rows, MEASURES))
