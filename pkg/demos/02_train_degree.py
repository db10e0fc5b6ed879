# Train a small comparison model (RN) for degree centrality and watch it converge.
# About 20 s on one core.

from centrality_gnn.datasets import generate_dataset, preset_specs
from centrality_gnn.training import TrainConfig, evaluate, train_model

train = generate_dataset(preset_specs("desk"), "desk")  # 100 ER + 100 power-law trees, n in [16, 32]
test = generate_dataset(preset_specs("desk-test"), "desk-test")
probe = test.subset(range(32))

config = TrainConfig(d=16, t_max=8, epochs=50, batches_per_epoch=8, batch_size=8, centralities=("degree",))


def show(model, log):
    if log.epoch % 5 == 4:
        print(f"epoch {log.epoch + 1:2d}  loss {log.loss['degree']:.4f}  probe accuracy {log.probe_accuracy:.3f}")


model, logs = train_model(config, train, probe, callback=show)

# ties count as unordered pairs; 'index' breaks them by vertex number instead
print(evaluate(model.gnn, model.head, test).to_table())
print(evaluate(model.gnn, model.head, test, ties="index").to_table())
