"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also repeated in the pytest terminal summary (see conftest.py).
Run standalone with ``python3 tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest
import scipy.sparse as sp
from scipy import stats

from centrality_gnn import autodiff as ad
from centrality_gnn.checkpoint import checkpoint_bytes
from centrality_gnn.datasets import TRAIN_FAMILIES, GeneratorSpec, generate_dataset, preset_specs
from centrality_gnn.generators import connected_watts_strogatz
from centrality_gnn.gnn import init_gnn_params, message_passing_run
from centrality_gnn.graph import disjoint_union, from_edge_list
from centrality_gnn.heads import am_loss, cmp_forward, comparison_from_scores, init_head_params, rn_loss
from centrality_gnn.metrics import kendall_tau, pair_counts, pca_1d
from centrality_gnn.oracles import (
    MEASURES,
    betweenness_centrality,
    closeness_centrality,
    degree_centrality,
    eigenvector_centrality,
    rank_label_matrix,
)
from centrality_gnn.training import TrainConfig, evaluate, train_model

from conftest import finite_difference, random_connected_graph, random_graph, rel_err
from reference import brute_force_betweenness, direct_closeness, direct_degree
from test_autodiff import GRAD_CASES

RESULTS: dict[int, str] = {}

DESK = dict(d=16, t_max=8, epochs=50, batches_per_epoch=8, batch_size=8, mode="RN", seed=0)


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[criterion] = line
    print(line)


# -- shared desk-scale runs --------------------------------------------------------


@pytest.fixture(scope="module")
def desk_train():
    return generate_dataset(preset_specs("desk"), "desk")


@pytest.fixture(scope="module")
def desk_test():
    return generate_dataset(preset_specs("desk-test"), "desk-test")


def _timed_train(config, dataset):
    t0 = time.perf_counter()
    model, _ = train_model(config, dataset)
    return model, time.perf_counter() - t0


@pytest.fixture(scope="module")
def single_run(desk_train):
    return _timed_train(TrainConfig(centralities=("degree",), **DESK), desk_train)


@pytest.fixture(scope="module")
def multi_run(desk_train):
    return _timed_train(TrainConfig(centralities=MEASURES, **DESK), desk_train)


# -- 1 ------------------------------------------------------------------------------


def test_criterion_01_oracle_equivalence():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = {"betweenness": 0.0, "closeness": 0.0, "degree": 0.0, "residual": 0.0}
    for _ in range(500):
        g = random_connected_graph(rng, 2, 7, p=float(rng.uniform(0.2, 0.9)))
        bc = betweenness_centrality(g, normalized=g.n >= 3)
        worst["betweenness"] = max(worst["betweenness"], np.abs(bc - brute_force_betweenness(g, g.n >= 3)).max())
        worst["closeness"] = max(worst["closeness"], np.abs(closeness_centrality(g) - direct_closeness(g)).max())
        worst["degree"] = max(worst["degree"], np.abs(degree_centrality(g) - direct_degree(g)).max())
        A = g.sparse_adjacency()
        v = eigenvector_centrality(g)
        worst["residual"] = max(worst["residual"], np.abs(A @ v - (v @ (A @ v)) * v).max())
    secs = time.perf_counter() - t0
    ok = (
        worst["betweenness"] <= 1e-9
        and worst["closeness"] <= 1e-9
        and worst["degree"] <= 1e-9
        and worst["residual"] < 1e-5
        and secs < 60
    )
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report(1, ok, f"500 connected graphs n<=7: max errors {detail}; {secs:.1f}s")
    assert ok


# -- 2 ------------------------------------------------------------------------------


def _grad_error(build, arrays):
    leaves = [ad.tensor(a.copy(), requires_grad=True) for a in arrays]
    grads = ad.backward(build(*leaves))
    worst = 0.0
    for leaf in leaves:
        def f():
            with ad.no_grad():
                return build(*leaves).item()

        worst = max(worst, rel_err(grads[leaf], finite_difference(f, leaf.data)))
    return worst


def _end_to_end_error():
    d, n = 4, 5
    g = from_edge_list(n, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)])
    gnn = init_gnn_params(d, seed=7, t_max=2)
    head = init_head_params("RN", ["degree"], d, seed=8)
    T = rank_label_matrix(g.degrees().astype(float))
    params = {**gnn.named_parameters(), **head.named_parameters()}
    # zero-initialised biases sit exactly on ReLU kinks; check at a nearby generic point
    jitter = np.random.default_rng(0)
    for p in params.values():
        p.data = p.data + 0.05 * jitter.normal(size=p.data.shape)

    def loss():
        return rn_loss(cmp_forward(head, message_passing_run(g.sparse_adjacency(), gnn), "degree"), T)

    grads = ad.backward(loss())

    def f():
        with ad.no_grad():
            return loss().item()

    worst = 0.0
    for p in params.values():
        numeric = finite_difference(f, p.data)
        analytic = grads.get(p, np.zeros_like(p.data))
        scale = max(np.abs(numeric).max(), np.abs(analytic).max(), 1e-6)
        worst = max(worst, np.abs(analytic - numeric).max() / scale)
    return worst


def test_criterion_02_gradient_suite():
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    errors = {}
    for name, (build, shapes) in GRAD_CASES.items():
        errors[name] = _grad_error(build, [rng.normal(size=s) for s in shapes])
    kinked = rng.uniform(0.2, 1.5, size=(3, 4)) * rng.choice([-1, 1], size=(3, 4))
    errors["relu"] = _grad_error(lambda a: ad.reduce_sum(ad.square(ad.relu(a))), [kinked])
    errors["log"] = _grad_error(lambda a: ad.reduce_sum(ad.log(a)), [rng.uniform(0.5, 2, (3, 4))])
    errors["div"] = _grad_error(
        lambda a, b: ad.reduce_sum(ad.div(a, b)), [rng.normal(size=(3, 4)), rng.uniform(0.5, 2, (3, 4))]
    )
    errors["max_min"] = _grad_error(
        lambda a: ad.square(ad.sub(ad.reduce_max(a), ad.reduce_min(a))), [np.array([0.3, -1.2, 2.5, 0.9])]
    )
    M = sp.random(5, 5, density=0.4, random_state=1, format="csr")
    errors["sparse_matmul"] = _grad_error(lambda x: ad.reduce_sum(ad.square(ad.sparse_matmul(M, x))), [rng.normal(size=(5, 3))])
    errors["end_to_end_rn"] = _end_to_end_error()
    secs = time.perf_counter() - t0
    worst_name = max(errors, key=errors.get)
    ok = errors[worst_name] <= 1e-4 and secs < 60
    report(2, ok, f"{len(errors)} checks, worst rel err {errors[worst_name]:.1e} ({worst_name}); {secs:.1f}s")
    assert ok


# -- 3 ------------------------------------------------------------------------------


def test_criterion_03_structural_invariants():
    rng = np.random.default_rng(3)
    params = init_gnn_params(8, seed=3, t_max=8)
    perm_err = batch_err = 0.0
    graphs = [random_graph(rng, int(rng.integers(1, 33)), float(rng.uniform(0.05, 0.4))) for _ in range(50)]
    solo = [message_passing_run(g.sparse_adjacency(), params).data for g in graphs]
    for g, V in zip(graphs, solo):
        perm = rng.permutation(g.n)
        W = message_passing_run(g.permuted(perm).sparse_adjacency(), params).data
        perm_err = max(perm_err, np.abs(W[perm] - V).max())
    for start in range(0, 50, 10):
        batch = disjoint_union(graphs[start:start + 10])
        U = message_passing_run(batch.union.sparse_adjacency(), params).data
        for k in range(len(batch)):
            batch_err = max(batch_err, np.abs(U[batch.member_slice(k)] - solo[start + k]).max())
    ok = perm_err <= 1e-6 and batch_err <= 1e-6
    report(3, ok, f"50 graphs n<=32: permutation err {perm_err:.1e}, batch err {batch_err:.1e}")
    assert ok


# -- 4 ------------------------------------------------------------------------------


def test_criterion_04_metric_consistency():
    rng = np.random.default_rng(4)
    exact = 0
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 21))
        truth = rng.permutation(n).astype(float)
        pred = rng.permutation(n).astype(float)
        pc = pair_counts(comparison_from_scores(pred), comparison_from_scores(truth))
        iu, ju = np.triu_indices(n, k=1)
        s = int(np.sum(np.sign(pred[ju] - pred[iu]) * np.sign(truth[ju] - truth[iu])))
        exact += pc.tp + pc.tn == n * (n - 1) // 2 + s
        worst = max(worst, abs(pc.rates()["accuracy"] - (kendall_tau(pred, truth) + 1) / 2))
    ok = exact == 200 and worst <= 1e-15
    report(4, ok, f"200 permutations: integer identity exact in {exact}/200, float gap {worst:.1e}")
    assert ok


# -- 5 ------------------------------------------------------------------------------


def test_criterion_05_desk_single_task(single_run, desk_test):
    model, secs = single_run
    acc = evaluate(model.gnn, model.head, desk_test).per_centrality["degree"].accuracy
    idx = evaluate(model.gnn, model.head, desk_test, ties="index").per_centrality["degree"].accuracy
    ok = acc >= 0.90 and secs < 15 * 60
    report(5, ok, f"single-task RN degree accuracy {acc:.4f} (>= 0.90); index-tie labels {idx:.4f}; train {secs:.0f}s")
    assert ok


# -- 6 ------------------------------------------------------------------------------


def test_criterion_06_desk_multitask(multi_run, single_run, desk_test):
    model, secs = multi_run
    report_ = evaluate(model.gnn, model.head, desk_test)
    avg = report_.mean_accuracy()
    deg = report_.per_centrality["degree"].accuracy
    single = evaluate(single_run[0].gnn, single_run[0].head, desk_test).per_centrality["degree"].accuracy
    idx = evaluate(model.gnn, model.head, desk_test, ties="index").mean_accuracy()
    per = " ".join(f"{c[:3]} {m.accuracy:.3f}" for c, m in report_.per_centrality.items())
    ok = avg >= 0.70 and abs(deg - single) <= 0.05 and secs < 30 * 60
    report(
        6,
        ok,
        f"multitask average {avg:.4f} (>= 0.70) [{per}]; degree gap {100 * abs(deg - single):.2f} pts (<= 5); "
        f"index-tie average {idx:.4f}; train {secs:.0f}s",
    )
    assert ok


# -- 7 ------------------------------------------------------------------------------


def test_criterion_07_size_generalisation(single_run):
    model, _ = single_run
    accs = {}
    for n in (32, 48, 64):
        specs = [
            GeneratorSpec(f, dict(TRAIN_FAMILIES[f]), (n, n), 25, 9000 + 10 * n + k)
            for k, f in enumerate(("erdos-renyi", "powerlaw-tree"))
        ]
        accs[n] = evaluate(model.gnn, model.head, generate_dataset(specs, f"n={n}")).mean_accuracy()
    ok = accs[64] >= 0.75
    report(7, ok, "criterion-5 model accuracy " + ", ".join(f"n={n}: {a:.4f}" for n, a in accs.items()) + " (n=64 >= 0.75)")
    assert ok


# -- 8 ------------------------------------------------------------------------------


def test_criterion_08_am_affine_invariance():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 40))
        pred, target = rng.normal(size=n), rng.random(n)
        a, b = float(np.exp(rng.uniform(-3, 3))), float(rng.uniform(-50, 50))
        worst = max(worst, abs(am_loss(a * pred + b, target).item() - am_loss(pred, target).item()))
    ok = worst <= 1e-12
    report(8, ok, f"500 random (pred, a>0, b): max |am_loss change| {worst:.1e} (<= 1e-12)")
    assert ok


# -- 9 ------------------------------------------------------------------------------


def _pca_spearman(model, graphs):
    out = []
    for g in graphs:
        V, hist = message_passing_run(g.sparse_adjacency(), model.gnn, record=True)
        ev = eigenvector_centrality(g)
        out.append((abs(stats.spearmanr(pca_1d(V, ev).values, np.log(ev)).statistic), pca_1d(hist[0]).degenerate))
    return out


def test_criterion_09_pca_sanity(single_run, multi_run):
    # the desk ER + tree models never see small-world graphs, so the check uses a desk-scale
    # multitask model trained on all four training families
    mixed, _ = _timed_train(TrainConfig(centralities=MEASURES, **DESK), generate_dataset(preset_specs("desk-mixed"), "desk-mixed"))
    graphs = [connected_watts_strogatz(n, 4, 0.25, seed=s) for s in range(5) for n in (32, 64)]
    res = _pca_spearman(mixed, graphs)
    rho = np.array([r for r, _ in res])
    step0 = all(flag for _, flag in res)
    ref = {name: np.mean([r for r, _ in _pca_spearman(run[0], graphs)]) for name, run in (("single", single_run), ("multi", multi_run))}
    # the criterion names a single graph; the median over ten seeds/sizes avoids picking one
    ok = float(np.median(rho)) >= 0.6 and step0
    report(
        9,
        ok,
        f"10 WS graphs (n=32,64 x 5 seeds): |spearman(pca, log eig)| median {np.median(rho):.3f} (>= 0.6), "
        f"min {rho.min():.3f}, {int(np.sum(rho < 0.6))}/10 below 0.6 [{' '.join(f'{r:.2f}' for r in rho)}]; "
        f"step-0 degenerate {step0}; ER+tree models mean {ref['single']:.3f}/{ref['multi']:.3f}",
    )
    assert ok


# -- 10 -----------------------------------------------------------------------------


def test_criterion_10_determinism(single_run, desk_train):
    again, _ = _timed_train(TrainConfig(centralities=("degree",), **DESK), desk_train)
    a, b = checkpoint_bytes(single_run[0]), checkpoint_bytes(again)
    ok = a == b
    report(10, ok, f"repeated criterion-5 run: checkpoints {'bit-identical' if ok else 'differ'} ({len(a)} bytes)")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
