import io

import numpy as np
import pytest
from hypothesis import given, settings

from centrality_gnn.errors import InputError, ParseError
from centrality_gnn.graph import (
    Graph,
    adjacency,
    disjoint_union,
    format_for_path,
    from_edge_list,
    is_connected,
    parse_edge_list,
    read_graph,
)

from conftest import graphs


def test_from_edge_list_collapses_directions():
    g = from_edge_list(3, [(0, 1), (1, 0), (1, 2)])
    assert g.edges == ((0, 1), (1, 2))


def test_from_edge_list_drops_self_loop():
    assert from_edge_list(2, [(0, 0)]).m == 0


def test_cycle_c4():
    g = from_edge_list(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert g.m == 4
    assert list(g.degrees()) == [2, 2, 2, 2]


def test_from_edge_list_rejects_out_of_range():
    with pytest.raises(InputError):
        from_edge_list(2, [(0, 2)])


def test_graph_rejects_non_canonical():
    with pytest.raises(InputError):
        Graph(3, ((1, 0),))
    with pytest.raises(InputError):
        Graph(0)


def test_adjacency_p2_and_empty():
    assert adjacency(from_edge_list(2, [(0, 1)])).tolist() == [[0, 1], [1, 0]]
    assert adjacency(Graph(2)).tolist() == [[0, 0], [0, 0]]


def test_adjacency_star():
    A = adjacency(from_edge_list(3, [(0, 1), (0, 2)]))
    assert A[0].tolist() == [0, 1, 1]
    assert A[1].tolist() == [1, 0, 0]
    assert A[2].tolist() == [1, 0, 0]


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_adjacency_symmetric_zero_diagonal(g):
    A = adjacency(g)
    assert np.array_equal(A, A.T)
    assert not np.any(np.diag(A))
    assert np.array_equal(g.sparse_adjacency().toarray(), A)


def test_disjoint_union_examples():
    p2 = from_edge_list(2, [(0, 1)])
    b = disjoint_union([p2, p2])
    assert b.union.n == 4 and b.union.edges == ((0, 1), (2, 3)) and b.offsets == (0, 2)

    single = Graph(1)
    b = disjoint_union([single])
    assert b.union == single and b.offsets == (0,)

    c3 = from_edge_list(3, [(0, 1), (1, 2), (2, 0)])
    b = disjoint_union([c3, p2])
    assert b.union.n == 5 and b.union.m == 4 and b.offsets == (0, 3)


def test_disjoint_union_empty_list():
    with pytest.raises(InputError):
        disjoint_union([])


@settings(max_examples=40, deadline=None)
@given(graphs(n_max=8), graphs(n_max=8), graphs(n_max=8))
def test_disjoint_union_roundtrip(a, b, c):
    batch = disjoint_union([a, b, c])
    assert [batch.member(k) for k in range(3)] == [a, b, c]


def test_parse_snap_relabels_by_first_appearance():
    g = parse_edge_list("# c\n1 2\n2 3\n")
    assert g.n == 3 and g.edges == ((0, 1), (1, 2))
    g = parse_edge_list("7 3\n3 5\n")
    # 7 -> 0, 3 -> 1, 5 -> 2
    assert g.edges == ((0, 1), (1, 2))


def test_parse_snap_self_loop_only():
    g = parse_edge_list("1 1\n")
    assert g.n == 1 and g.m == 0


def test_parse_accepts_bytes_and_streams():
    assert parse_edge_list(b"1 2\n").m == 1
    assert parse_edge_list(io.StringIO("1 2\n2 3\n")).m == 2


def test_parse_matrix_market_symmetrizes():
    text = "%%MatrixMarket matrix coordinate pattern general\n% comment\n2 2 2\n1 2\n2 1\n"
    g = parse_edge_list(text, format="matrix-market")
    assert g.n == 2 and g.edges == ((0, 1),)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 3"):
        parse_edge_list("1 2\n2 3\nx y\n")
    with pytest.raises(ParseError, match="line 2"):
        parse_edge_list("1 2\n3\n")
    with pytest.raises(ParseError):
        parse_edge_list("1 2\n", format="matrix-market")


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_serialization_roundtrip(g):
    assert Graph.from_text(g.to_text()) == g


def test_dataset_text_format():
    g = from_edge_list(3, [(2, 1), (0, 1)])
    assert g.to_text() == "3 2\n0 1\n1 2\n"


def test_is_connected():
    assert is_connected(from_edge_list(4, [(0, 1), (1, 2), (2, 3), (3, 0)]))
    assert not is_connected(from_edge_list(4, [(0, 1), (2, 3)]))
    assert is_connected(Graph(1))


def test_permuted_and_subgraph():
    g = from_edge_list(3, [(0, 1)])
    assert g.permuted([2, 0, 1]).edges == ((0, 2),)
    assert g.subgraph_range(1, 3).edges == ()


def test_format_for_path_and_read_graph(tmp_path):
    assert format_for_path("a.mtx") == "matrix-market"
    assert format_for_path("a.txt") == "snap-edgelist"
    assert format_for_path("a.xyz") is None
    p = tmp_path / "toy.edges"
    p.write_text("10 20\n20 30\n")
    assert read_graph(p).m == 2
    q = tmp_path / "toy.graph"
    q.write_text(from_edge_list(3, [(0, 1)]).to_text())
    assert read_graph(q) == from_edge_list(3, [(0, 1)])
