import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kcheeger.errors import ParameterError, ParseError, ValidationError
from kcheeger.graph import (
    Graph,
    Partition,
    VertexSet,
    block_labels,
    disjoint_union,
    edge_count_between,
    edge_count_quadform,
    generate,
    read_edge_list,
    volume,
    write_edge_list,
)
from kcheeger.spectral import build_laplacian

from conftest import graphs


def test_degrees_and_volume(k4):
    assert k4.degrees == (3, 3, 3, 3)
    assert k4.volume == 12 == 2 * k4.num_edges
    assert k4.max_degree == 3


def test_edges_are_normalized():
    g = Graph(3, [(2, 0), (1, 2)])
    assert g.edges == ((0, 2), (1, 2))
    assert g == Graph(3, [(0, 2), (2, 1)])
    assert hash(g) == hash(Graph(3, [(0, 2), (2, 1)]))


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 1), (1, 0)], [(0, 3)]])
def test_invalid_edges_rejected(edges):
    with pytest.raises(ValidationError):
        Graph(3, edges)


def test_components_and_isolated_vertex():
    g = Graph(5, [(0, 1), (2, 3)])
    assert g.num_components() == 3
    assert not g.is_connected()
    assert sorted(map(sorted, g.components())) == [[0, 1], [2, 3], [4]]
    assert g.degrees[4] == 0


def test_adjacency_is_read_only(k4):
    with pytest.raises(ValueError):
        k4.adjacency[0, 1] = 0.0


def test_edge_count_ordered_incidence(k4):
    s, t = VertexSet(4, {0, 1}), VertexSet(4, {2, 3})
    assert edge_count_between(k4, s, t) == 4
    assert edge_count_between(k4, s, s) == 2


def test_edge_count_quadform_k4(k4):
    lap = build_laplacian(k4)
    s = VertexSet(4, {0, 1})
    assert edge_count_quadform(k4, lap, s, s) == pytest.approx(2.0, abs=1e-12)
    assert edge_count_quadform(k4, lap, s, s.complement()) == pytest.approx(4.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=8), st.data())
def test_quadform_matches_count(g, data):
    s = VertexSet(g.n, data.draw(st.sets(st.integers(0, g.n - 1))))
    t = VertexSet(g.n, data.draw(st.sets(st.integers(0, g.n - 1))))
    lap = build_laplacian(g)
    assert abs(edge_count_quadform(g, lap, s, t) - edge_count_between(g, s, t)) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=8), st.data())
def test_volume_additivity(g, data):
    s = VertexSet(g.n, data.draw(st.sets(st.integers(0, g.n - 1))))
    assert volume(g, s) + volume(g, s.complement()) == g.volume
    full = VertexSet(g.n, range(g.n))
    assert edge_count_between(g, s, full) == volume(g, s)


def test_partition_validation():
    with pytest.raises(ParameterError):
        Partition(2, [0, 0, 0])
    p = Partition(3, [0, 0, 2], allow_empty=True)
    assert p.has_empty_part()
    assert Partition.from_parts(4, [[0, 1], [2, 3]]) == Partition(2, [0, 0, 1, 1])
    with pytest.raises(ParameterError):
        Partition.from_parts(3, [[0, 1], [1, 2]])


@pytest.mark.parametrize(
    "kind,params,n,m",
    [
        ("complete", {"n": 10}, 10, 45),
        ("path", {"n": 5}, 5, 4),
        ("cycle", {"n": 6}, 6, 6),
        ("grid", {"rows": 3, "cols": 4}, 12, 17),
    ],
)
def test_deterministic_generators(kind, params, n, m):
    g = generate(kind, **params)
    assert (g.n, g.num_edges) == (n, m)


def test_cycle_needs_three_vertices():
    with pytest.raises(ParameterError):
        generate("cycle", n=2)


def test_random_generators_reproducible():
    a = generate("planted_partition", seed=7, n=30, k=3, p_in=0.9, p_out=0.05)
    b = generate("planted_partition", seed=7, n=30, k=3, p_in=0.9, p_out=0.05)
    c = generate("planted_partition", seed=8, n=30, k=3, p_in=0.9, p_out=0.05)
    assert a == b and a != c
    labels = block_labels(30, 3)
    inside = sum(labels[u] == labels[v] for u, v in a.edges)
    assert inside > 3 * (a.num_edges - inside)


def test_gnp_extremes():
    assert generate("gnp", n=6, p=0.0).num_edges == 0
    assert generate("gnp", n=6, p=1.0) == generate("complete", n=6)


@pytest.mark.parametrize(
    "params,param",
    [({"n": 5, "p": 1.5}, "p"), ({"n": -1, "p": 0.5}, "n")],
)
def test_generator_errors_name_parameter(params, param):
    with pytest.raises(ParameterError) as info:
        generate("gnp", **params)
    assert info.value.param == param


def test_planted_requires_stronger_inside():
    with pytest.raises(ParameterError):
        generate("planted_partition", n=10, k=2, p_in=0.1, p_out=0.5)


def test_disjoint_union_shifts_labels():
    g = disjoint_union(generate("complete", n=2), generate("cycle", n=3))
    assert g.edges == ((0, 1), (2, 3), (2, 4), (3, 4))
    assert g.num_components() == 2


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=10))
def test_edge_list_round_trip(g):
    assert read_edge_list(write_edge_list(g)) == g


def test_edge_list_comments_and_errors():
    g = read_edge_list("# comment\nn 3\n0 1\n\n# more\n1 2\n")
    assert g.edges == ((0, 1), (1, 2))
    with pytest.raises(ParseError, match="line 2"):
        read_edge_list("n 3\n0 x\n")
    with pytest.raises(ParseError):
        read_edge_list("0 1\n")
    with pytest.raises(ValidationError, match="line 3"):
        read_edge_list("n 3\n0 1\n1 0\n")
    with pytest.raises(ValidationError):
        read_edge_list("n 3\n1 1\n")


def test_vertex_set_indicator():
    s = VertexSet(4, [1, 3])
    np.testing.assert_array_equal(s.indicator, [0, 1, 0, 1])
    assert s.complement() == VertexSet(4, [0, 2])
    with pytest.raises(ParameterError):
        VertexSet(3, [3])
