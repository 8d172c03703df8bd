"""Online assignment algorithms: Subtree-Decomposition, greedy, Permutation and B*.

Subtree-Decomposition (SD) is a most-preferred-free-site algorithm on a power-of-two weighted
tree. For a request r and free set F it walks down the decomposition:

- Phase 1 (F meets T_0): a request in T_i (i >= 1) stays in T_i while T_i has a free vertex,
  otherwise it continues in T_0 as the pseudo-request par(rho_i); a request in T_0 continues
  in T_0.
- Phase 2 (T_0 is full): a request in T^(j) continues in T^(j) while T^(j) has a free vertex,
  otherwise it continues in T^(3-j) as the pseudo-request rho^(3-j).

The walk ends at a single-vertex node, which is the chosen site.
"""

import logging
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, Optional, Sequence, Tuple, Union

from .decomposition import Decomposition, decompose, vertex_mask
from .instance import InstanceFormatException, OnlineInstance, normalize
from .metric import MetricSpace, WeightedTree, mst_of_metric, round_to_power_of_two, tree_metric
from .online import AssignmentException, MpfsAlgorithm, NoFreeSiteException, OnlineAlgorithm
from .oracle import IncrementalMatcher

log = logging.getLogger(__name__)

Geometry = Union[MetricSpace, WeightedTree]

ALGORITHM_NAMES = ("sd", "greedy", "permutation", "bstar")


class UnknownAlgorithmException(Exception):
    pass


class CapacityException(Exception):
    pass


class SiteLabelException(Exception):
    pass


def _walk(node, r, free_mask):
    while not node.is_leaf:
        part = node.part_of(r)
        if part and free_mask & node.part_mask(part):
            node = node.part_child(part)
            continue
        if free_mask & node.t0_mask:
            if part:
                r = node.heavy_parent(part)
            node = node.t0_child()
            continue
        side = node.side_of(r)
        if not free_mask & node.side_mask(side):
            side = 3 - side
            r = node.side_root(side)
        node = node.side_child(side)
    return node.root


def sd_select(decomposition: Decomposition, request: int, free: Iterable[int]) -> int:
    """The vertex SD assigns request to when the free vertices are free."""
    if not free:
        raise NoFreeSiteException("No free site left for request {}".format(request))
    free_mask = vertex_mask(free, decomposition.tree.n)
    if not free_mask & decomposition.mask:
        raise NoFreeSiteException(
            "None of the free sites {} lie in the decomposed tree".format(sorted(free))
        )
    return _walk(decomposition, request, free_mask)


def _without(vertices, mask):
    return tuple(v for v in vertices if not (mask >> v) & 1)


def _preference(node, r, cache):
    key = (node.root, node.mask, r)
    cached = cache.get(key)
    if cached is not None:
        return cached
    if node.is_leaf:
        result = (node.root,)
    else:
        part = node.part_of(r)
        if part:
            result = _preference(node.part_child(part), r, cache) + _preference(
                node.t0_child(), node.heavy_parent(part), cache
            )
            taken = node.part_mask(part) | node.t0_mask
        else:
            result = _preference(node.t0_child(), r, cache)
            taken = node.t0_mask
        side = node.side_of(r)
        other = 3 - side
        result += _without(_preference(node.side_child(side), r, cache), taken)
        result += _without(
            _preference(node.side_child(other), node.side_root(other), cache), node.t0_mask
        )
    cache[key] = result
    return result


def sd_preference_list(
    decomposition: Decomposition, request: int, cache: Optional[Dict] = None
) -> Tuple[int, ...]:
    """Every vertex of the decomposed tree, most preferred first, for a request at request."""
    return _preference(decomposition, request, {} if cache is None else cache)


class SubtreeDecomposition(MpfsAlgorithm):
    """SD over a decomposed tree whose vertex i stands for the site labels[i] (identity by
    default), so one implementation serves full trees, site trees and restricted subtrees."""

    name = "sd"

    def __init__(
        self, decomposition: Decomposition, labels: Optional[Sequence[int]] = None
    ) -> None:
        self.decomposition = decomposition
        self.tree = decomposition.tree
        self.labels = tuple(range(self.tree.n)) if labels is None else tuple(labels)
        if len(self.labels) != self.tree.n:
            raise SiteLabelException(
                "Need one label per tree vertex: {} labels for {} vertices".format(
                    len(self.labels), self.tree.n
                )
            )
        self._index = {label: i for i, label in enumerate(self.labels)}
        self._preferences = {}

    def index_of(self, label: int) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise SiteLabelException(
                "{} is not a vertex of this SD tree {}".format(label, self.labels)
            )

    def select(self, request: int, free: FrozenSet[int]) -> int:
        if not free:
            raise NoFreeSiteException("No free site left for request {}".format(request))
        free_mask = vertex_mask((self.index_of(s) for s in free), self.tree.n)
        vertex = _walk(self.decomposition, self.index_of(request), free_mask)
        return self.labels[vertex]

    def preference_list(self, request: int) -> Tuple[int, ...]:
        order = sd_preference_list(self.decomposition, self.index_of(request), self._preferences)
        return tuple(self.labels[v] for v in order)


def greedy_preference_list(
    geometry: Geometry, request: int, sites: Optional[Iterable[int]] = None
) -> Tuple[int, ...]:
    """Sites by distance to request, ties by lower site index."""
    sites = geometry.points() if sites is None else sites
    return tuple(sorted(sites, key=lambda s: (geometry.distance(request, s), s)))


class Greedy(MpfsAlgorithm):
    name = "greedy"

    def __init__(self, geometry: Geometry, sites: Sequence[int]) -> None:
        self.geometry = geometry
        self.sites = tuple(sites)
        self._preferences = {}

    def preference_list(self, request: int) -> Tuple[int, ...]:
        order = self._preferences.get(request)
        if order is None:
            order = greedy_preference_list(self.geometry, request, self.sites)
            self._preferences[request] = order
        return order


def permutation_select(
    history: Sequence[int], request: int, free: FrozenSet[int], oracle: IncrementalMatcher
) -> int:
    """oracle holds an optimal matching of history; it is extended by request and the site the
    new matching uses in addition to the old one is returned."""
    if list(oracle.requests) != list(history):
        raise AssignmentException(
            "Matcher holds {} but the history is {}".format(list(oracle.requests), list(history))
        )
    site = oracle.add_request(request)
    if site not in free:
        raise AssignmentException(
            "The new matching site {} for request {} is not free in {}".format(
                site, request, sorted(free)
            )
        )
    return site


class Permutation(OnlineAlgorithm):
    """Keeps serving the sites of the optimal matching of the requests seen so far."""

    name = "permutation"

    def __init__(
        self, cost: Callable[[int, int], Fraction], sites: Sequence[int], capacities: Sequence[int]
    ) -> None:
        if any(c != 1 for c in capacities):
            raise CapacityException(
                "Permutation needs unit capacities, got {}".format(list(capacities))
            )
        self.cost = cost
        self.sites = tuple(sites)
        self._matcher = None

    def assign(self, history: Sequence[int], request: int, free: FrozenSet[int]) -> int:
        if self._matcher is None or list(self._matcher.requests) != list(history):
            self._matcher = IncrementalMatcher(self.cost, self.sites, [1] * len(self.sites))
            for r in history:
                self._matcher.add_request(r)
        return permutation_select(history, request, free, self._matcher)


def nearest_site(geometry: Geometry, sites: Iterable[int], request: int) -> int:
    return min(sites, key=lambda s: (geometry.distance(request, s), s))


class NearestSiteLift(MpfsAlgorithm):
    """Moves each request to its nearest site (ties by lower index) and lets inner serve it."""

    def __init__(self, inner: MpfsAlgorithm, geometry: Geometry, sites: Sequence[int]) -> None:
        self.inner = inner
        self.geometry = geometry
        self.sites = tuple(sites)
        self.name = inner.name
        self.colocated_first = inner.colocated_first
        self._nearest = {}

    def moved(self, request: int) -> int:
        site = self._nearest.get(request)
        if site is None:
            site = nearest_site(self.geometry, self.sites, request)
            self._nearest[request] = site
        return site

    def preference_list(self, request: int) -> Tuple[int, ...]:
        return self.inner.preference_list(self.moved(request))

    def select(self, request: int, free: FrozenSet[int]) -> int:
        return self.inner.select(self.moved(request), free)


def lift_nearest_site(
    inner: MpfsAlgorithm, geometry: Geometry, sites: Sequence[int]
) -> NearestSiteLift:
    return NearestSiteLift(inner, geometry, sites)


class BStar(SubtreeDecomposition):
    """SD on the power-of-two rounded MST of the normalized site metric.

    scale is the minimum site distance; a distance in the rounded tree times scale is in the
    units of the original metric.
    """

    name = "bstar"

    def __init__(self, space: MetricSpace, sites: Iterable[int]) -> None:
        self.space = space
        self.sites = tuple(sorted(sites))
        if not self.sites:
            raise InstanceFormatException("B* needs at least one site")
        site_space, self.scale = normalize(space.restricted_to(self.sites))
        self.mst = mst_of_metric(site_space)
        rounded = round_to_power_of_two(self.mst)
        super(BStar, self).__init__(decompose(rounded), labels=self.sites)


def build_bstar(space: MetricSpace, sites: Iterable[int]) -> BStar:
    return BStar(space, sites)


def _as_metric(geometry: Geometry) -> MetricSpace:
    if isinstance(geometry, WeightedTree):
        return tree_metric(geometry)
    return geometry


def make_algorithm(name: str, instance: OnlineInstance) -> OnlineAlgorithm:
    """A fresh algorithm for instance by its registered name."""
    if name not in ALGORITHM_NAMES:
        raise UnknownAlgorithmException(
            "Unknown algorithm {!r}, expected one of: {}".format(name, ", ".join(ALGORITHM_NAMES))
        )
    geometry = instance.geometry
    if name == "sd":
        if not isinstance(geometry, WeightedTree):
            raise InstanceFormatException("sd runs on tree instances, got {!r}".format(geometry))
        if sorted(instance.sites) != list(range(geometry.n)):
            raise InstanceFormatException(
                "sd needs a site on every tree vertex, got {}; use bstar instead".format(
                    list(instance.sites)
                )
            )
        return SubtreeDecomposition(decompose(geometry))
    if name == "greedy":
        return Greedy(geometry, instance.sites)
    if name == "permutation":
        return Permutation(geometry.distance, instance.sites, instance.capacities)
    space = _as_metric(geometry)
    assert isinstance(space, MetricSpace)
    log.debug("Building bstar over sites %s", list(instance.sites))
    return lift_nearest_site(build_bstar(space, instance.sites), geometry, instance.sites)
