"""Exact optimal offline assignment costs and exhaustive worst-case ratio search.

The optimum is a min-cost flow from the requests to the sites (site capacities on the sink side),
solved by successive shortest paths over the residual graph with exact Fraction costs.
"""

import collections
import concurrent.futures
import itertools
import logging
from fractions import Fraction
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple, Union

import networkx as nx
import toolz

from .instance import OnlineInstance, enumerate_sequences
from .metric import MetricSpace, WeightedTree
from .online import OnlineAlgorithm, run_online
from .report import Finding

log = logging.getLogger(__name__)

CostFunction = Callable[[int, int], Fraction]

SEARCH_GUARD = 10 ** 6
BRUTE_FORCE_MAX_K = 6

_SINK = ("sink",)


class SearchGuardException(Exception):
    pass


class CostModelException(Exception):
    pass


class MatchingException(Exception):
    pass


class ZeroOptimumException(Exception):
    """An algorithm paid on a request sequence whose optimum is free; witness is the sequence."""

    def __init__(self, message: str, witness: Sequence[int]) -> None:
        super(ZeroOptimumException, self).__init__(message)
        self.witness = tuple(witness)


class CostModel(object):
    METRIC = "metric"
    TREE_PATH = "tree-path"
    TREE_MAX_WEIGHT = "tree-max-weight"
    TAGS = (METRIC, TREE_PATH, TREE_MAX_WEIGHT)

    @staticmethod
    def for_geometry(geometry: Union[MetricSpace, WeightedTree]) -> "CostModel":
        if isinstance(geometry, WeightedTree):
            return CostModel(CostModel.TREE_PATH, geometry)
        return CostModel(CostModel.METRIC, geometry)

    def __init__(self, tag: str, geometry: Union[MetricSpace, WeightedTree]) -> None:
        if tag not in CostModel.TAGS:
            raise CostModelException(
                "Unknown cost model {!r}, expected one of: {}".format(
                    tag, ", ".join(CostModel.TAGS)
                )
            )
        if tag == CostModel.METRIC and not isinstance(geometry, MetricSpace):
            raise CostModelException("The metric cost model needs a MetricSpace geometry")
        if tag != CostModel.METRIC and not isinstance(geometry, WeightedTree):
            raise CostModelException("The {} cost model needs a WeightedTree geometry".format(tag))
        self.tag = tag
        self.geometry = geometry

    def __call__(self, u: int, v: int) -> Fraction:
        if self.tag == CostModel.TREE_MAX_WEIGHT:
            return self.geometry.max_weight_distance(u, v)
        return self.geometry.distance(u, v)

    def __repr__(self):
        return "CostModel({})".format(self.tag)


def _request_node(i):
    return ("r", i)


def _site_node(s):
    return ("s", s)


class IncrementalMatcher(object):
    """Keeps a min-cost assignment of the requests seen so far, one augmentation per request.

    Each new request is routed along a shortest residual path to a site with spare capacity,
    picking the smallest (distance, site) pair; the prefix assignment is optimal after every step.
    """

    def __init__(self, cost: CostFunction, sites: Iterable[int], capacities: Iterable[int]) -> None:
        self._cost = cost
        self.sites = tuple(sites)
        self._capacity = dict(zip(self.sites, capacities))
        self._load = {s: 0 for s in self.sites}
        self.requests = []
        self.assignment = []
        self.total_cost = Fraction(0)

    def _edge_cost(self, i, s):
        return self._cost(self.requests[i], s)

    def residual_graph(self, with_sink: bool = False) -> nx.DiGraph:
        graph = nx.DiGraph()
        for i in range(len(self.requests)):
            graph.add_node(_request_node(i))
        for s in self.sites:
            graph.add_node(_site_node(s))
        for i in range(len(self.requests)):
            for s in self.sites:
                c = self._edge_cost(i, s)
                if self.assignment[i] == s:
                    graph.add_edge(_site_node(s), _request_node(i), weight=-c)
                else:
                    graph.add_edge(_request_node(i), _site_node(s), weight=c)
        if with_sink:
            for s in self.sites:
                if self._load[s] < self._capacity[s]:
                    graph.add_edge(_site_node(s), _SINK, weight=0)
                if self._load[s] > 0:
                    graph.add_edge(_SINK, _site_node(s), weight=0)
        return graph

    def add_request(self, position: int) -> int:
        """Adds a request and returns the site whose load grew to accommodate it."""
        i = len(self.requests)
        self.requests.append(position)
        self.assignment.append(None)
        graph = self.residual_graph()
        pred, dist = nx.bellman_ford_predecessor_and_distance(graph, _request_node(i))
        candidates = [
            (dist[_site_node(s)], s)
            for s in self.sites
            if _site_node(s) in dist and self._load[s] < self._capacity[s]
        ]
        if not candidates:
            raise MatchingException(
                "No site with spare capacity is reachable for request {} at {}".format(i, position)
            )
        length, site = min(candidates)
        node = _site_node(site)
        while node != _request_node(i):
            previous = pred[node][0]
            if previous[0] == "r":
                self.assignment[previous[1]] = node[1]
            node = previous
        self._load[site] += 1
        self.total_cost += length
        log.debug("Request %d at %s augmented to site %s at cost %s", i, position, site, length)
        return site

    def loads(self) -> Dict[int, int]:
        return dict(self._load)


def optimal_matcher(
    instance: OnlineInstance, cost: Optional[CostFunction] = None
) -> IncrementalMatcher:
    matcher = IncrementalMatcher(
        cost or instance.geometry.distance, instance.sites, instance.capacities
    )
    for r in instance.requests:
        matcher.add_request(r)
    return matcher


def opt_cost(instance: OnlineInstance, cost: Optional[CostFunction] = None) -> Fraction:
    return optimal_matcher(instance, cost).total_cost


def certify(matcher: IncrementalMatcher) -> bool:
    """True if the assignment is provably optimal: no negative residual cycle, and Bellman-Ford
    potentials leave every residual edge with a nonnegative reduced cost."""
    graph = matcher.residual_graph(with_sink=True)
    if nx.negative_edge_cycle(graph, weight="weight"):
        return False
    if sum(1 for _ in matcher.assignment) != len(matcher.requests) or None in matcher.assignment:
        return False
    recomputed = sum(
        (matcher._edge_cost(i, s) for i, s in enumerate(matcher.assignment)), Fraction(0)
    )
    if recomputed != matcher.total_cost:
        return False
    origin = ("origin",)
    graph.add_edges_from(((origin, v) for v in list(graph.nodes)), weight=0)
    potential = nx.single_source_bellman_ford_path_length(graph, origin, weight="weight")
    return all(
        data["weight"] + potential[u] - potential[v] >= 0
        for u, v, data in graph.edges(data=True)
        if u != origin
    )


def brute_force_cost(
    instance: OnlineInstance, cost: Optional[CostFunction] = None
) -> Optional[Fraction]:
    """Minimum over every capacity-respecting assignment; small k only."""
    if instance.k > BRUTE_FORCE_MAX_K:
        raise SearchGuardException(
            "Brute force supports k <= {}, got {}".format(BRUTE_FORCE_MAX_K, instance.k)
        )
    cost = cost or instance.geometry.distance
    capacity = dict(zip(instance.sites, instance.capacities))
    best = None
    for assignment in itertools.product(instance.sites, repeat=instance.k):
        load = collections.Counter(assignment)
        if any(load[s] > capacity[s] for s in load):
            continue
        total = sum((cost(r, s) for r, s in zip(instance.requests, assignment)), Fraction(0))
        if best is None or total < best:
            best = total
    return best


def _worst_in_chunk(geometry, sites, capacities, alg, num_cost, den_cost, sequences):
    best_ratio, witness = Fraction(0), None
    for sequence in sequences:
        instance = OnlineInstance(geometry, sites, capacities, sequence)
        alg_cost = run_online(instance, alg, cost=num_cost).total_cost
        opt = opt_cost(instance, den_cost)
        if opt == 0:
            if alg_cost != 0:
                raise ZeroOptimumException(
                    "{} pays {} on {} where the optimum is free".format(
                        alg.name, alg_cost, list(sequence)
                    ),
                    sequence,
                )
            continue
        ratio = alg_cost / opt
        if witness is None or ratio > best_ratio:
            best_ratio, witness = ratio, tuple(sequence)
    return best_ratio, witness


def worst_case_ratio(
    geometry: Union[MetricSpace, WeightedTree],
    sites: Sequence[int],
    capacities: Sequence[int],
    alg: OnlineAlgorithm,
    num_cost: CostFunction,
    den_cost: CostFunction,
    positions: Optional[Iterable[int]] = None,
    workers: int = 1,
    unsafe: bool = False,
) -> Tuple[Fraction, Optional[Tuple[int, ...]]]:
    """Largest alg/opt ratio over every request sequence on positions (all points by default).

    Ties keep the lexicographically smallest witness; sequences with a zero optimum are skipped.
    Returns (Fraction(0), None) when no sequence has a positive optimum.
    """
    positions = sorted(set(geometry.points() if positions is None else positions))
    k = sum(capacities)
    count = len(positions) ** k
    if count > SEARCH_GUARD and not unsafe:
        raise SearchGuardException(
            "{} sequences of length {} over {} positions exceed the guard of {}".format(
                count, k, len(positions), SEARCH_GUARD
            )
        )
    sequences = enumerate_sequences(positions, k)
    if workers <= 1:
        return _worst_in_chunk(geometry, sites, capacities, alg, num_cost, den_cost, sequences)

    chunk_size = max(1, count // (4 * workers))
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(
                _worst_in_chunk, geometry, sites, capacities, alg, num_cost, den_cost, chunk
            )
            for chunk in toolz.partition_all(chunk_size, sequences)
        ]
        results = [f.result() for f in futures]
    best_ratio, witness = Fraction(0), None
    # chunks arrive in lexicographic order, so strict improvement keeps the smallest witness
    for ratio, chunk_witness in results:
        if chunk_witness is not None and (witness is None or ratio > best_ratio):
            best_ratio, witness = ratio, chunk_witness
    return best_ratio, witness


def check_capacity_collapse(
    geometry: Union[MetricSpace, WeightedTree],
    sites: Sequence[int],
    capacities: Sequence[int],
    alg: OnlineAlgorithm,
    positions: Iterable[int],
    num_cost: CostFunction,
    den_cost: CostFunction,
    unsafe: bool = False,
) -> Finding:
    """The worst ratio of an MPFS algorithm with capacities is bounded by its worst ratio on the
    unit-capacity instances over the same sites and request positions."""
    with_capacities, witness = worst_case_ratio(
        geometry, sites, capacities, alg, num_cost, den_cost, positions=positions, unsafe=unsafe
    )
    unit, unit_witness = worst_case_ratio(
        geometry,
        sites,
        [1] * len(sites),
        alg,
        num_cost,
        den_cost,
        positions=positions,
        unsafe=unsafe,
    )
    return Finding.compare(
        "capacity-collapse",
        with_capacities,
        unit,
        detail="witness {} vs unit witness {}".format(
            list(witness) if witness else None, list(unit_witness) if unit_witness else None
        ),
    )
