import numpy as np
import pytest

from centrality_gnn import autodiff as ad
from centrality_gnn.errors import NumericError
from centrality_gnn.gnn import (
    GATES,
    CellParams,
    EmbeddingState,
    init_gnn_params,
    lstm_step,
    message_passing_run,
    mlp_forward,
)
from centrality_gnn.graph import Graph, adjacency, disjoint_union, from_edge_list
from centrality_gnn.heads import cmp_forward, init_head_params, rn_loss
from centrality_gnn.oracles import rank_label_matrix

from conftest import finite_difference, random_graph, rel_err


def test_init_shapes_and_names():
    p = init_gnn_params(8, seed=0, t_max=3)
    names = p.named_parameters()
    assert "gnn/v_init" in names and names["gnn/v_init"].shape == (8,)
    for k in range(3):
        assert names[f"gnn/src_msg/{k}/w"].shape == (8, 8)
        assert f"gnn/tgt_msg/{k}/b" in names
    assert names["gnn/cell/kernel"].shape == (24, 32)
    assert all(v.requires_grad for v in names.values())


def test_init_biases_and_forget_offset():
    p = init_gnn_params(6, seed=3)
    for _, b in p.src_msg + p.tgt_msg:
        assert np.all(b.data == 0)
    f = GATES.index("f")
    bias = p.cell.bias.data
    # the base glorot draw is bounded by sqrt(6/12) < 1, so forget entries sit in (0, 2)
    assert np.all(bias[f * 6:(f + 1) * 6] > 0)
    q = init_gnn_params(6, seed=3)
    base = bias - q.cell.bias.data
    assert np.all(base == 0)


def test_init_deterministic():
    a = init_gnn_params(5, seed=11).named_parameters()
    b = init_gnn_params(5, seed=11).named_parameters()
    assert all(np.array_equal(a[k].data, b[k].data) for k in a)


def test_mlp_forward_examples():
    x = np.random.default_rng(0).normal(size=(4, 3))
    zero = [(ad.tensor(np.zeros((3, 3))), ad.tensor(np.zeros(3))), (ad.tensor(np.zeros((3, 2))), ad.tensor([1.0, 2.0]))]
    assert np.allclose(mlp_forward(zero, x).data, [[1, 2]] * 4)
    w, b = np.ones((3, 2)), np.array([0.5, -0.5])
    assert np.allclose(mlp_forward([(ad.tensor(w), ad.tensor(b))], x).data, x @ w + b)
    # a hidden unit with pre-activation -5 contributes nothing downstream
    w1 = ad.tensor(np.zeros((3, 1)))
    b1 = ad.tensor([-5.0])
    w2 = ad.tensor([[100.0]])
    b2 = ad.tensor([0.0])
    assert np.all(mlp_forward([(w1, b1), (w2, b2)], x).data == 0)


def zero_cell(d):
    return CellParams(
        kernel=ad.tensor(np.zeros((3 * d, 4 * d))),
        bias=ad.tensor(np.zeros(4 * d)),
        ln_gain={k: ad.tensor(np.ones(d)) for k in (*GATES, "c")},
        ln_bias={k: ad.tensor(np.zeros(d)) for k in (*GATES, "c")},
    )


def test_lstm_zero_fixed_point():
    d = 4
    state = EmbeddingState(ad.tensor(np.zeros((3, d))), ad.tensor(np.zeros((3, d))))
    out = lstm_step(zero_cell(d), np.zeros((3, 2 * d)), state)
    assert np.all(out.V.data == 0)


def test_lstm_saturated_forget_keeps_memory():
    d = 4
    cell = zero_cell(d)
    bias = np.zeros(4 * d)
    bias[GATES.index("f") * d:(GATES.index("f") + 1) * d] = 50.0
    bias[GATES.index("i") * d:(GATES.index("i") + 1) * d] = -50.0
    cell.bias = ad.tensor(bias)
    mem = np.random.default_rng(1).normal(size=(2, d))
    out = lstm_step(cell, np.zeros((2, 2 * d)), EmbeddingState(ad.tensor(np.zeros((2, d))), ad.tensor(mem)))
    ref = ad.layer_norm(mem, np.ones(d), np.zeros(d)).data
    assert np.allclose(out.V_h.data, ref, atol=1e-12)


def test_lstm_step_gradient():
    d, n = 3, 4
    p = init_gnn_params(d, seed=2)
    rng = np.random.default_rng(0)
    x = ad.tensor(rng.normal(size=(n, 2 * d)), requires_grad=True)
    V = ad.tensor(rng.normal(size=(n, d)), requires_grad=True)
    H = ad.tensor(rng.normal(size=(n, d)), requires_grad=True)
    w = rng.normal(size=(n, d))

    def loss():
        s = lstm_step(p.cell, x, EmbeddingState(V, H))
        return ad.reduce_sum(ad.mul(ad.add(s.V, s.V_h), w))

    grads = ad.backward(loss())
    for leaf in (x, V, H, p.cell.kernel, p.cell.ln_gain["c"]):
        def f():
            with ad.no_grad():
                return loss().item()

        assert rel_err(grads[leaf], finite_difference(f, leaf.data)) <= 1e-5


def test_edgeless_rows_identical():
    V = message_passing_run(adjacency(Graph(5)), init_gnn_params(6, seed=0, t_max=4))
    assert np.allclose(V.data, V.data[0])


def test_vertex_transitive_rows_identical():
    cycle = from_edge_list(7, [(i, (i + 1) % 7) for i in range(7)])
    V = message_passing_run(cycle.sparse_adjacency(), init_gnn_params(6, seed=1, t_max=5))
    assert np.max(np.abs(V.data - V.data[0])) < 1e-9


def test_permutation_equivariance(rng):
    p = init_gnn_params(8, seed=4, t_max=6)
    for _ in range(10):
        g = random_graph(rng, int(rng.integers(2, 33)), 0.2)
        perm = rng.permutation(g.n)
        a = message_passing_run(g.sparse_adjacency(), p).data
        b = message_passing_run(g.permuted(perm).sparse_adjacency(), p).data
        assert np.max(np.abs(b[perm] - a)) <= 1e-6


def test_batch_equals_individual(rng):
    p = init_gnn_params(8, seed=5, t_max=6)
    gs = [random_graph(rng, int(rng.integers(1, 20)), 0.25) for _ in range(5)]
    batch = disjoint_union(gs)
    V = message_passing_run(batch.union.sparse_adjacency(), p).data
    for k, g in enumerate(gs):
        solo = message_passing_run(g.sparse_adjacency(), p).data
        assert np.max(np.abs(V[batch.member_slice(k)] - solo)) <= 1e-6


def test_record_history():
    p = init_gnn_params(4, seed=0, t_max=3)
    V, hist = message_passing_run(from_edge_list(3, [(0, 1)]).sparse_adjacency(), p, record=True)
    assert len(hist) == 4
    assert np.allclose(hist[0], p.v_init.data)
    assert np.array_equal(hist[-1], V.data)


def test_non_finite_embedding_raises():
    p = init_gnn_params(4, seed=0, t_max=3)
    p.cell.kernel.data[:] = np.nan
    with pytest.raises(NumericError, match="step 1"):
        message_passing_run(from_edge_list(3, [(0, 1)]).sparse_adjacency(), p)


def test_end_to_end_rn_gradient():
    d, n = 4, 5
    g = from_edge_list(n, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)])
    gnn = init_gnn_params(d, seed=7, t_max=2)
    head = init_head_params("RN", ["degree"], d, seed=8)
    T = rank_label_matrix(g.degrees().astype(float))

    def loss():
        V = message_passing_run(g.sparse_adjacency(), gnn)
        return rn_loss(cmp_forward(head, V, "degree"), T)

    params = {**gnn.named_parameters(), **head.named_parameters()}
    # zero-initialised biases put some ReLUs exactly on their kink; check at a nearby generic point
    jitter = np.random.default_rng(0)
    for p in params.values():
        p.data = p.data + 0.05 * jitter.normal(size=p.data.shape)
    grads = ad.backward(loss())

    def f():
        with ad.no_grad():
            return loss().item()

    worst = 0.0
    for name, p in params.items():
        numeric = finite_difference(f, p.data)
        analytic = grads.get(p, np.zeros_like(p.data))
        scale = max(np.abs(numeric).max(), np.abs(analytic).max(), 1e-6)
        worst = max(worst, np.abs(analytic - numeric).max() / scale)
    assert worst <= 1e-4
