from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from .metric import (
    MetricSpace,
    MetricValidationException,
    WeightedTree,
    format_exact,
    four_point_sides,
    mst_of_metric,
    round_to_power_of_two,
    round_up_to_power_of_two,
    to_fraction,
    tree_metric,
)


def p3():
    return WeightedTree.from_edges(3, [(0, 1, 1), (1, 2, 2)])


def star():
    return WeightedTree.from_edges(4, [(0, 1, 1), (0, 2, 2), (0, 3, 2)])


@st.composite
def trees(draw, max_n=8):
    n = draw(st.integers(min_value=1, max_value=max_n))
    edges = []
    for v in range(1, n):
        parent = draw(st.integers(min_value=0, max_value=v - 1))
        weight = Fraction(draw(st.integers(1, 12)), draw(st.integers(1, 3)))
        edges.append((parent, v, weight))
    return WeightedTree.from_edges(n, edges)


@st.composite
def metrics(draw, max_n=6):
    """Path metrics of random trees plus a constant: always a metric with positive distances."""
    tree = draw(trees(max_n=max_n))
    shift = Fraction(draw(st.integers(1, 4)))
    n = tree.n
    return MetricSpace(
        [[0 if u == v else tree.path_distance(u, v) + shift for v in range(n)] for u in range(n)]
    )


def test_to_fraction_accepts_exact_strings():
    assert to_fraction("3/2") == Fraction(3, 2)
    assert to_fraction(" 4 ") == Fraction(4)
    assert to_fraction(Fraction(1, 3)) == Fraction(1, 3)


def test_to_fraction_rejects_floats_and_garbage():
    with pytest.raises(MetricValidationException) as e:
        to_fraction(0.5)
    assert "Expected an exact number" in str(e.value)

    with pytest.raises(MetricValidationException) as e:
        to_fraction("1/0")
    assert "Malformed exact number" in str(e.value)

    with pytest.raises(MetricValidationException):
        to_fraction(True)


def test_format_exact():
    assert format_exact(Fraction(6, 4)) == "3/2"
    assert format_exact(Fraction(4, 2)) == "2"
    assert format_exact(0) == "0"


def test_path_distance():
    assert p3().path_distance(0, 2) == 3
    assert p3().path_distance(1, 1) == 0
    assert star().path_distance(1, 3) == 3


def test_max_weight_distance():
    assert p3().max_weight_distance(0, 2) == 2
    assert p3().max_weight_distance(0, 1) == 1
    for v in range(4):
        assert star().max_weight_distance(v, v) == 0


def test_lca():
    assert p3().lca(1, 2) == 1
    assert p3().lca(2, 2) == 2
    assert star().lca(2, 3) == 0


def test_index_out_of_range():
    with pytest.raises(MetricValidationException) as e:
        p3().path_distance(0, 3)
    assert "Index 3 out of range [0, 3)" in str(e.value)


def test_tree_validation():
    with pytest.raises(MetricValidationException) as e:
        WeightedTree.from_edges(3, [(0, 1, 1)])
    assert "has 2 edges, got 1" in str(e.value)

    with pytest.raises(MetricValidationException) as e:
        WeightedTree.from_edges(4, [(0, 1, 1), (1, 0, 1), (2, 3, 1)])
    assert "do not connect" in str(e.value)

    with pytest.raises(MetricValidationException) as e:
        WeightedTree.from_edges(2, [(0, 1, 0)])
    assert "positive weight" in str(e.value)

    with pytest.raises(MetricValidationException) as e:
        WeightedTree([None, 2, 1], [None, 1, 1])
    assert "cycle" in str(e.value)


def test_from_edges_orients_away_from_root():
    tree = WeightedTree.from_edges(3, [(2, 1, 2), (1, 0, 1)], root=2)
    assert tree.parent == (1, 2, None)
    assert tree.children[2] == (1,)
    assert tree.is_ancestor(2, 0)
    assert not tree.is_ancestor(0, 2)


def test_power_of_two_flag():
    assert p3().is_power_of_two
    assert not WeightedTree.from_edges(2, [(0, 1, 3)]).is_power_of_two
    assert not WeightedTree.from_edges(2, [(0, 1, Fraction(1, 2))]).is_power_of_two


def test_metric_validation():
    with pytest.raises(MetricValidationException) as e:
        MetricSpace([[0, 1], [2, 0]])
    assert "Asymmetric distance" in str(e.value)

    with pytest.raises(MetricValidationException) as e:
        MetricSpace([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    assert "Triangle inequality fails" in str(e.value)

    with pytest.raises(MetricValidationException) as e:
        MetricSpace([[0, 0], [0, 0]])
    assert "at distance 0" in str(e.value)

    with pytest.raises(MetricValidationException) as e:
        MetricSpace([[0, 1], [1]])
    assert "not square" in str(e.value)

    with pytest.raises(MetricValidationException) as e:
        MetricSpace([0, 1])
    assert "Distance matrix rows must be lists, got 0" in str(e.value)

    with pytest.raises(MetricValidationException) as e:
        WeightedTree.from_edges(2, [5])
    assert "Malformed edge: 5" in str(e.value)


def test_mst_of_metric():
    space = MetricSpace([[0, 1, 2], [1, 0, "3/2"], [2, "3/2", 0]])
    mst = mst_of_metric(space)
    assert sorted(mst.edges()) == [(1, 0, 1), (2, 1, Fraction(3, 2))]


def test_mst_of_small_metrics():
    assert list(mst_of_metric(MetricSpace([[0]])).edges()) == []
    assert list(mst_of_metric(MetricSpace([[0, 5], [5, 0]])).edges()) == [(1, 0, 5)]


def test_mst_ties_prefer_lower_endpoints():
    space = MetricSpace([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    assert sorted(mst_of_metric(space).edges()) == [(1, 0, 1), (2, 0, 1)]


def test_round_to_power_of_two():
    tree = WeightedTree.from_edges(3, [(0, 1, 1), (1, 2, "3/2")])
    assert [w for _, _, w in round_to_power_of_two(tree).edges()] == [1, 2]

    tree = WeightedTree.from_edges(4, [(0, 1, 1), (1, 2, 3), (2, 3, 5)])
    rounded = round_to_power_of_two(tree)
    assert [w for _, _, w in rounded.edges()] == [1, 4, 8]
    assert rounded.parent == tree.parent
    assert round_up_to_power_of_two(4) == 4


def test_round_needs_normalized_weights():
    with pytest.raises(MetricValidationException) as e:
        round_up_to_power_of_two(Fraction(1, 2))
    assert "normalize the metric first" in str(e.value)


def test_restricted_to_relabels_in_order():
    tree, labels = star().restricted_to({0, 2, 3}, 0)
    assert labels == [0, 2, 3]
    assert tree.parent == (None, 0, 0)
    assert tree.weight[1:] == (2, 2)

    with pytest.raises(MetricValidationException) as e:
        p3().restricted_to({0, 2}, 0)
    assert "parent 1 of 2 is missing" in str(e.value)


def test_steiner_vertices():
    assert star().steiner_vertices([2, 3]) == {0, 2, 3}
    assert p3().steiner_vertices([1, 2]) == {1, 2}
    assert p3().steiner_vertices([]) == set()


def test_tree_metric_matches_path_distance():
    space = tree_metric(star())
    assert space.distance(1, 3) == 3
    assert space.distance(2, 3) == 4


def test_four_point_needs_common_ancestor():
    with pytest.raises(MetricValidationException) as e:
        four_point_sides(p3(), 1, 0, 1, 2, 2)
    assert "not a common ancestor" in str(e.value)


@settings(max_examples=200, deadline=None)
@given(trees(), st.data())
def test_tree_distance_sandwich(tree, data):
    u = data.draw(st.integers(0, tree.n - 1))
    v = data.draw(st.integers(0, tree.n - 1))
    d_max = tree.max_weight_distance(u, v)
    d = tree.path_distance(u, v)
    assert d_max <= d <= (tree.n - 1) * d_max
    assert (d == 0) == (u == v)


@settings(max_examples=200, deadline=None)
@given(trees(), st.data())
def test_four_point_identity(tree, data):
    vs = [data.draw(st.integers(0, tree.n - 1)) for _ in range(4)]
    top = vs[0]
    for v in vs[1:]:
        top = tree.lca(top, v)
    rho = data.draw(st.sampled_from([a for a in range(tree.n) if tree.is_ancestor(a, top)]))
    lhs, rhs = four_point_sides(tree, rho, *vs)
    assert lhs == rhs


@settings(max_examples=100, deadline=None)
@given(metrics())
def test_mst_sandwich_and_rounding(space):
    mst = mst_of_metric(space)
    scale = space.min_distance()
    if scale is None:
        return
    rounded = round_to_power_of_two(mst_of_metric(space.scaled(1 / scale)))
    assert rounded.is_power_of_two
    for u in range(space.n):
        for v in range(u + 1, space.n):
            d = space.distance(u, v)
            assert mst.max_weight_distance(u, v) <= d <= mst.path_distance(u, v)
            assert rounded.max_weight_distance(u, v) < 2 * d / scale
