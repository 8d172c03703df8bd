from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from .algorithms import Greedy, SubtreeDecomposition
from .decomposition import decompose
from .instance import GeneratorConfig, OnlineInstance, generate
from .metric import MetricSpace, WeightedTree
from .online import OnlineAlgorithm
from .oracle import (
    CostModel,
    CostModelException,
    IncrementalMatcher,
    MatchingException,
    SearchGuardException,
    ZeroOptimumException,
    brute_force_cost,
    certify,
    check_capacity_collapse,
    opt_cost,
    optimal_matcher,
    worst_case_ratio,
)


def p3():
    return WeightedTree.from_edges(3, [(0, 1, 1), (1, 2, 2)])


def path(n):
    return WeightedTree.from_edges(n, [(i, i + 1, 1) for i in range(n - 1)])


def test_opt_cost_on_p3():
    instance = OnlineInstance(p3(), [0, 1, 2], [1, 1, 1], [2, 2, 2], kind="OMT_S2")
    assert opt_cost(instance) == 5
    assert opt_cost(instance, CostModel(CostModel.TREE_MAX_WEIGHT, p3())) == 4
    assert brute_force_cost(instance) == 5


def test_opt_cost_with_capacities():
    instance = OnlineInstance(p3(), [0, 2], [2, 1], [1, 1, 2])
    assert opt_cost(instance) == 2
    matcher = optimal_matcher(instance)
    assert matcher.loads() == {0: 2, 2: 1}
    assert certify(matcher)


def test_matcher_reroutes_earlier_requests():
    matcher = IncrementalMatcher(p3().path_distance, [0, 2], [1, 1])
    assert matcher.add_request(2) == 2
    assert matcher.add_request(2) == 0
    assert matcher.total_cost == 3
    assert sorted(matcher.assignment) == [0, 2]
    assert certify(matcher)


def test_matcher_ties_go_to_the_lower_site():
    space = MetricSpace([[0, 1, 1], [1, 0, 2], [1, 2, 0]])
    matcher = IncrementalMatcher(space.distance, [1, 2], [1, 1])
    assert matcher.add_request(0) == 1


def test_matcher_without_room():
    matcher = IncrementalMatcher(p3().path_distance, [0], [1])
    matcher.add_request(0)
    with pytest.raises(MatchingException) as e:
        matcher.add_request(1)
    assert "No site with spare capacity is reachable for request 1 at 1" in str(e.value)


def test_certify_rejects_a_bad_assignment():
    instance = OnlineInstance(p3(), [0, 2], [1, 1], [0, 2])
    matcher = optimal_matcher(instance)
    assert matcher.total_cost == 0
    matcher.assignment = [2, 0]
    assert not certify(matcher)
    matcher.total_cost = Fraction(6)
    assert not certify(matcher)


def test_cost_model():
    assert CostModel.for_geometry(p3()).tag == CostModel.TREE_PATH
    assert CostModel(CostModel.TREE_MAX_WEIGHT, p3())(0, 2) == 2
    with pytest.raises(CostModelException) as e:
        CostModel("nosuch", p3())
    assert "Unknown cost model 'nosuch'" in str(e.value)
    with pytest.raises(CostModelException) as e:
        CostModel(CostModel.METRIC, p3())
    assert "needs a MetricSpace geometry" in str(e.value)


def test_brute_force_guard():
    n = 7
    instance = OnlineInstance(path(n), range(n), [1] * n, range(n), kind="OMT_S2")
    with pytest.raises(SearchGuardException) as e:
        brute_force_cost(instance)
    assert "Brute force supports k <= 6, got 7" in str(e.value)


def test_worst_case_ratio_on_a_pair():
    tree = path(2)
    alg = SubtreeDecomposition(decompose(tree))
    ratio, witness = worst_case_ratio(tree, [0, 1], [1, 1], alg, tree.distance, tree.distance)
    assert ratio == 1
    assert witness == (0, 0)


def test_worst_case_ratio_without_positive_optimum():
    tree = WeightedTree([None], [None])
    alg = SubtreeDecomposition(decompose(tree))
    assert worst_case_ratio(tree, [0], [1], alg, tree.distance, tree.distance) == (0, None)


def test_worst_case_ratio_guard():
    tree = path(11)
    alg = Greedy(tree, range(6))
    with pytest.raises(SearchGuardException) as e:
        worst_case_ratio(tree, range(6), [1] * 6, alg, tree.distance, tree.distance)
    assert "exceed the guard of 1000000" in str(e.value)


@pytest.mark.timeout(120)
def test_worst_case_ratio_is_independent_of_workers():
    tree = p3()
    alg = Greedy(tree, [0, 1, 2])
    args = (tree, [0, 1, 2], [1, 1, 1], alg, tree.distance, tree.distance)
    assert worst_case_ratio(*args, workers=2) == worst_case_ratio(*args)


def test_capacity_collapse_on_p3():
    tree = p3()
    alg = Greedy(tree, [0, 2])
    finding = check_capacity_collapse(
        tree, [0, 2], [2, 1], alg, [0, 1, 2], tree.distance, tree.distance
    )
    assert finding.name == "capacity-collapse"
    assert finding.rhs == 2
    assert finding.passed


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=0, max_value=2 ** 32),
    st.integers(min_value=1, max_value=3),
    st.integers(min_value=0, max_value=1),
    st.integers(min_value=0, max_value=1),
)
def test_opt_cost_matches_brute_force(seed, m, extra_points, extra_requests):
    k = m + extra_requests
    instance = generate(
        GeneratorConfig(
            seed=seed,
            shape="random-metric",
            n=m + extra_points,
            m=m,
            k=k,
            capacity_scheme="random",
        )
    )
    matcher = optimal_matcher(instance)
    assert matcher.total_cost == brute_force_cost(instance)
    assert certify(matcher)


class _Farthest(OnlineAlgorithm):
    name = "farthest"

    def assign(self, history, request, free):
        return max(free)


def test_worst_case_ratio_rejects_a_paid_free_optimum():
    tree = path(2)
    with pytest.raises(ZeroOptimumException) as e:
        worst_case_ratio(tree, [0, 1], [1, 1], _Farthest(), tree.distance, tree.distance)
    assert "farthest pays 1 on [0, 1] where the optimum is free" in str(e.value)
    assert e.value.witness == (0, 1)
