import itertools
from fractions import Fraction

import pytest

from .algorithms import (
    BStar,
    CapacityException,
    Greedy,
    NearestSiteLift,
    Permutation,
    SiteLabelException,
    SubtreeDecomposition,
    UnknownAlgorithmException,
    build_bstar,
    greedy_preference_list,
    make_algorithm,
    nearest_site,
    sd_preference_list,
    sd_select,
)
from .decomposition import decompose
from .instance import InstanceFormatException, OnlineInstance, enumerate_small_trees
from .metric import MetricSpace, WeightedTree, tree_metric
from .online import (
    AssignmentException,
    MpfsAlgorithm,
    NoFreeSiteException,
    OnlineAlgorithm,
    run_online,
)


def p3():
    return WeightedTree.from_edges(3, [(0, 1, 1), (1, 2, 2)])


def p3_instance(requests):
    return OnlineInstance(p3(), [0, 1, 2], [1, 1, 1], requests, kind="OMT_S2")


def three_points():
    return MetricSpace([[0, 1, 2], [1, 0, "3/2"], [2, "3/2", 0]])


def test_sd_select_on_p3():
    top = decompose(p3())
    assert sd_select(top, 2, {0, 1, 2}) == 2
    assert sd_select(top, 2, {0, 1}) == 1
    assert sd_select(top, 2, {0}) == 0


def test_sd_select_without_free_sites():
    with pytest.raises(NoFreeSiteException) as e:
        sd_select(decompose(p3()), 2, set())
    assert "No free site left for request 2" in str(e.value)


def test_sd_preference_lists_on_p3():
    top = decompose(p3())
    assert sd_preference_list(top, 2) == (2, 1, 0)
    assert sd_preference_list(top, 0) == (0, 1, 2)


def test_sd_run_costs_on_p3():
    instance = p3_instance([2, 2, 2])
    trace = run_online(instance, make_algorithm("sd", instance))
    assert trace.sites == (2, 1, 0)
    assert trace.total_cost == 5
    assert trace.cost_under(p3().max_weight_distance) == 4


def test_sd_zero_cost_on_a_permutation():
    instance = p3_instance([1, 0, 2])
    assert run_online(instance, make_algorithm("sd", instance)).total_cost == 0


def test_sd_selection_agrees_with_preference_list():
    for n in range(1, 5):
        for tree in enumerate_small_trees(n, (0, 1)):
            alg = SubtreeDecomposition(decompose(tree))
            for r in range(n):
                order = alg.preference_list(r)
                assert sorted(order) == list(range(n))
                assert order[0] == r
                for size in range(1, n + 1):
                    for free in itertools.combinations(range(n), size):
                        expected = next(v for v in order if v in free)
                        assert alg.select(r, set(free)) == expected


def test_sd_labels():
    alg = SubtreeDecomposition(decompose(p3()), labels=[10, 20, 30])
    assert alg.select(30, {10, 20}) == 20
    assert alg.preference_list(10) == (10, 20, 30)
    with pytest.raises(SiteLabelException) as e:
        alg.index_of(2)
    assert "2 is not a vertex of this SD tree" in str(e.value)

    with pytest.raises(SiteLabelException) as e:
        SubtreeDecomposition(decompose(p3()), labels=[10, 20])
    assert "Need one label per tree vertex: 2 labels for 3 vertices" in str(e.value)


def test_greedy():
    assert greedy_preference_list(p3(), 2) == (2, 1, 0)
    alg = Greedy(three_points(), [0, 1, 2])
    assert alg.preference_list(2) == (2, 1, 0)
    assert alg.select(0, {1, 2}) == 1
    # equal distances go to the lower index
    equal = Greedy(MetricSpace([[0, 1, 1], [1, 0, 1], [1, 1, 0]]), [0, 1, 2])
    assert equal.select(0, {1, 2}) == 1


def test_permutation_follows_the_optimal_matching():
    instance = p3_instance([1, 1, 1])
    trace = run_online(instance, make_algorithm("permutation", instance))
    assert trace.sites == (1, 0, 2)

    pair = WeightedTree.from_edges(2, [(0, 1, 1)])
    instance = OnlineInstance(pair, [0, 1], [1, 1], [0, 0], kind="OMT_S2")
    assert run_online(instance, make_algorithm("permutation", instance)).sites == (0, 1)


def test_permutation_rebuilds_on_a_new_history():
    alg = Permutation(p3().path_distance, [0, 1, 2], [1, 1, 1])
    assert alg.assign((), 1, frozenset({0, 1, 2})) == 1
    assert alg.assign((), 2, frozenset({0, 1, 2})) == 2
    assert alg.assign((2,), 2, frozenset({0, 1})) == 1


def test_permutation_needs_unit_capacities():
    with pytest.raises(CapacityException) as e:
        Permutation(p3().path_distance, [0, 2], [2, 1])
    assert "Permutation needs unit capacities, got [2, 1]" in str(e.value)


def test_bstar_on_a_path_metric():
    alg = build_bstar(three_points(), [0, 1, 2])
    assert isinstance(alg, BStar)
    assert alg.scale == 1
    assert sorted(alg.mst.edges()) == [(1, 0, 1), (2, 1, Fraction(3, 2))]
    assert alg.tree == p3()
    assert alg.preference_list(2) == (2, 1, 0)


def test_bstar_keeps_the_site_scale():
    alg = build_bstar(three_points(), [2, 0])
    assert alg.labels == (0, 2)
    assert alg.scale == 2
    assert [w for _, _, w in alg.tree.edges()] == [1]


def test_bstar_lifts_off_site_requests():
    instance = OnlineInstance(three_points(), [0, 2], [1, 1], [1, 1], kind="OTR")
    alg = make_algorithm("bstar", instance)
    assert isinstance(alg, NearestSiteLift)
    assert alg.name == "bstar"
    assert nearest_site(three_points(), [0, 2], 1) == 0
    assert run_online(instance, alg).sites == (0, 2)


def test_bstar_runs_on_tree_geometries():
    tree = WeightedTree.from_edges(3, [(0, 1, 3), (1, 2, 1)])
    instance = OnlineInstance(tree, [0, 2], [1, 2], [1, 1, 0], kind="OTR")
    trace = run_online(instance, make_algorithm("bstar", instance))
    assert sorted(trace.sites) == [0, 2, 2]
    assert isinstance(tree_metric(tree), MetricSpace)


def test_make_algorithm_errors():
    instance = p3_instance([2, 2, 2])
    with pytest.raises(UnknownAlgorithmException) as e:
        make_algorithm("nosuch", instance)
    assert "Unknown algorithm 'nosuch'" in str(e.value)

    metric = OnlineInstance(three_points(), [0, 1, 2], [1, 1, 1], [0, 1, 2])
    with pytest.raises(InstanceFormatException) as e:
        make_algorithm("sd", metric)
    assert "sd runs on tree instances" in str(e.value)

    partial = OnlineInstance(p3(), [0, 2], [1, 1], [1, 1])
    with pytest.raises(InstanceFormatException) as e:
        make_algorithm("sd", partial)
    assert "use bstar instead" in str(e.value)


class _Stubborn(OnlineAlgorithm):
    name = "stubborn"

    def assign(self, history, request, free):
        return 0


class _Backwards(MpfsAlgorithm):
    name = "backwards"

    def preference_list(self, request):
        return (0, 1, 2)


def test_run_online_checks_the_algorithm():
    with pytest.raises(AssignmentException) as e:
        run_online(p3_instance([0, 0, 0]), _Stubborn())
    assert "stubborn assigned request 0 at time 2 to site 0, which is not free" in str(e.value)

    with pytest.raises(AssignmentException) as e:
        run_online(p3_instance([2, 2, 2]), _Backwards())
    assert "backwards sent request 2 at time 1 to 0 although its own site was free" in str(
        e.value
    )


def test_trace_with_capacities():
    instance = OnlineInstance(p3(), [0, 2], [2, 1], [1, 1, 1], kind="OTR")
    trace = run_online(instance, Greedy(p3(), [0, 2]))
    assert trace.sites == (0, 0, 2)
    assert trace.total_cost == 4
    assert len(trace) == 3
    assert trace.free_after(0) == {0, 2}
    assert trace.free_after(1) == {0, 2}
    assert trace.free_before(3) == {2}
    assert trace.free_after(3) == frozenset()
    assert trace.site_at(3) == 2
