import numpy as np
import pytest

from relaxtik.graph import (
    Graph,
    Weights,
    degree_table,
    from_edge_pairs,
    grid_graph,
    line_graph,
    read_edge_list,
    write_edge_list,
)


def test_line_graph_structure():
    g = line_graph(5)
    assert g.n_vertices == 5
    assert g.m_edges == 4
    assert g.edges.tolist() == [[1, 2], [2, 3], [3, 4], [4, 5]]
    assert g.first.tolist() == [0, 1, 2, 3]
    assert g.second.tolist() == [1, 2, 3, 4]


def test_grid_graph_structure():
    g = grid_graph(2, 3)
    # 1 2 3
    # 4 5 6
    assert g.n_vertices == 6
    horiz = [[1, 2], [2, 3], [4, 5], [5, 6]]
    vert = [[1, 4], [2, 5], [3, 6]]
    assert g.edges.tolist() == horiz + vert


def test_degree_table():
    g = grid_graph(2, 3)
    assert degree_table(g).tolist() == [2, 3, 2, 2, 3, 2]
    assert degree_table(line_graph(4)).tolist() == [1, 2, 2, 1]


def test_edges_immutable():
    g = line_graph(3)
    with pytest.raises(ValueError):
        g.edges[0, 0] = 7


def test_rejects_duplicates_self_loops_disorder():
    with pytest.raises(ValueError):
        Graph(3, [[1, 2], [1, 2], [2, 3]])
    with pytest.raises(ValueError):
        from_edge_pairs(3, [[1, 1], [2, 3]])
    with pytest.raises(ValueError):
        Graph(3, [[2, 1], [2, 3]])  # must be ordered n < m
    with pytest.raises(ValueError):
        Graph(3, [[1, 4]])


def test_rejects_disconnected():
    with pytest.raises(ValueError):
        Graph(4, [[1, 2], [3, 4]])


def test_from_edge_pairs_normalizes():
    g = from_edge_pairs(3, [[2, 1], [3, 2]])
    assert g.edges.tolist() == [[1, 2], [2, 3]]


def test_line_and_grid_minimums():
    with pytest.raises(ValueError):
        line_graph(1)
    with pytest.raises(ValueError):
        grid_graph(1, 1)
    assert grid_graph(1, 4).m_edges == 3


def test_weights_validation():
    g = line_graph(3)
    wt = Weights.constant(g, 2.0, 5.0)
    wt.check_graph(g)
    assert wt.vertex_weights.tolist() == [2.0, 2.0, 2.0]
    assert wt.edge_weights.tolist() == [5.0, 5.0]
    with pytest.raises(ValueError):
        Weights(np.array([1.0, -1.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        Weights(np.array([1.0, 1.0]), np.array([0.0]))
    with pytest.raises(ValueError):
        Weights.constant(line_graph(4), 1.0, 1.0).check_graph(g)


def test_edge_list_round_trip(tmp_path):
    g = grid_graph(3, 3)
    lam = np.linspace(0.5, 2.0, g.m_edges)
    path = tmp_path / "edges.txt"
    write_edge_list(path, g, lam)
    g2, lam2 = read_edge_list(path)
    assert g2.edges.tolist() == g.edges.tolist()
    assert np.array_equal(lam2, lam)


def test_edge_list_comments_and_no_weights(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("# a comment\n1 2\n2 3  # trailing\n\n")
    g, lam = read_edge_list(path)
    assert g.edges.tolist() == [[1, 2], [2, 3]]
    assert lam is None


def test_edge_list_partial_weights_rejected(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("1 2 3.0\n2 3\n")
    with pytest.raises(ValueError):
        read_edge_list(path)
