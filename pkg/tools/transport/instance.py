"""Online transportation instances: the quintuple (geometry, sites, capacities, requests, kind).

Instances are immutable once built and validated. This module also holds the seeded generators,
the exhaustive enumerators used by the acceptance sweeps and the JSON instance format.
"""

import hashlib
import itertools
import json
import logging
import random
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Tuple, Union

import networkx as nx

from .metric import (
    MetricSpace,
    MetricValidationException,
    WeightedTree,
    format_exact,
)

log = logging.getLogger(__name__)

KINDS = ("OTR", "OMM", "OMM_S", "OMT_S2")
SHAPES = ("random-tree", "path", "star", "random-metric")
CAPACITY_SCHEMES = ("unit", "uniform", "random")
REQUEST_POSITIONS = ("sites", "all", "off-site")

# random.Random is MT19937; seeding with an int and the randint/choice/shuffle calls used below
# give the same streams on every CPython platform.
RNG_NAME = "python-random-mt19937"

MAX_ENUMERATED_TREE_SIZE = 6


class InstanceFormatException(Exception):
    pass


class OnlineInstance(object):
    def __init__(
        self,
        geometry: Union[MetricSpace, WeightedTree],
        sites: Sequence[int],
        capacities: Sequence[int],
        requests: Sequence[int],
        kind: str = "OTR",
        seed: Optional[int] = None,
    ) -> None:
        self.geometry = geometry
        self.sites = tuple(sites)
        self.capacities = tuple(capacities)
        self.requests = tuple(requests)
        self.kind = kind
        self.seed = seed
        self.validate()

    @property
    def n(self) -> int:
        return self.geometry.n

    @property
    def m(self) -> int:
        return len(self.sites)

    @property
    def k(self) -> int:
        return len(self.requests)

    @property
    def is_tree(self) -> bool:
        return isinstance(self.geometry, WeightedTree)

    def is_unit_capacity(self) -> bool:
        return all(c == 1 for c in self.capacities)

    def requests_on_sites(self) -> bool:
        site_set = set(self.sites)
        return all(r in site_set for r in self.requests)

    def capacity_of(self, site: int) -> int:
        return self.capacities[self.sites.index(site)]

    def with_requests(
        self, requests: Sequence[int], kind: Optional[str] = None
    ) -> "OnlineInstance":
        return OnlineInstance(
            self.geometry, self.sites, self.capacities, requests, kind or self.kind, self.seed
        )

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise InstanceFormatException(
                "Unknown instance kind {!r}, expected one of: {}".format(
                    self.kind, ", ".join(KINDS)
                )
            )
        if not isinstance(self.geometry, (MetricSpace, WeightedTree)):
            raise InstanceFormatException(
                "Geometry must be a MetricSpace or a WeightedTree, got {!r}".format(self.geometry)
            )
        n = self.geometry.n
        if not self.sites:
            raise InstanceFormatException("An instance needs at least one server site")
        if len(self.sites) != len(self.capacities):
            raise InstanceFormatException(
                "{} sites but {} capacities".format(len(self.sites), len(self.capacities))
            )
        if len(set(self.sites)) != len(self.sites):
            raise InstanceFormatException("Duplicate server sites: {}".format(list(self.sites)))
        for label, points in (("site", self.sites), ("request", self.requests)):
            for p in points:
                if isinstance(p, bool) or not isinstance(p, int) or p < 0 or p >= n:
                    raise InstanceFormatException(
                        "{} {!r} out of range [0, {})".format(label.capitalize(), p, n)
                    )
        for c in self.capacities:
            if isinstance(c, bool) or not isinstance(c, int) or c < 1:
                raise InstanceFormatException(
                    "Capacities must be integers >= 1, got {!r}".format(c)
                )
        if sum(self.capacities) != self.k:
            raise InstanceFormatException(
                "Total capacity {} does not match the {} requests".format(
                    sum(self.capacities), self.k
                )
            )
        if self.kind in ("OMM", "OMM_S", "OMT_S2") and not self.is_unit_capacity():
            raise InstanceFormatException(
                "{} instances need unit capacities, got {}".format(self.kind, list(self.capacities))
            )
        if self.kind in ("OMM_S", "OMT_S2") and not self.requests_on_sites():
            raise InstanceFormatException(
                "{} requests must lie on server sites: {}".format(self.kind, list(self.requests))
            )
        if self.kind == "OMT_S2":
            if not self.is_tree or not self.geometry.is_power_of_two:
                raise InstanceFormatException("OMT_S2 needs a power-of-two weighted tree")
            if sorted(self.sites) != list(range(n)):
                raise InstanceFormatException("OMT_S2 needs a server on every vertex")

    def to_json(self) -> dict:
        doc = {
            "kind": self.kind,
            "n": self.geometry.n,
            "sites": list(self.sites),
            "capacities": list(self.capacities),
            "requests": list(self.requests),
        }
        if self.is_tree:
            doc["root"] = self.geometry.root
            doc["edges"] = sorted(
                [min(v, p), max(v, p), format_exact(w)] for v, p, w in self.geometry.edges()
            )
        else:
            doc["dist"] = [[format_exact(x) for x in row] for row in self.geometry.dist]
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc

    def digest(self) -> str:
        doc = self.to_json()
        doc.pop("seed", None)
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode("utf-8")).hexdigest()

    def __eq__(self, other):
        return isinstance(other, OnlineInstance) and self.to_json() == other.to_json()

    def __repr__(self):
        return "OnlineInstance(kind={}, n={}, sites={}, capacities={}, requests={})".format(
            self.kind, self.n, list(self.sites), list(self.capacities), list(self.requests)
        )


def serialize_instance(instance: OnlineInstance) -> str:
    return json.dumps(instance.to_json(), indent=2, sort_keys=True) + "\n"


def _int_list(doc, key):
    values = doc.get(key)
    if not isinstance(values, list):
        raise InstanceFormatException("Field {!r} must be a list, got {!r}".format(key, values))
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int):
            raise InstanceFormatException("Field {!r} must hold integers, got {!r}".format(key, v))
    return values


def _exact_number(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InstanceFormatException(
            "Field {!r} must hold integers or \"p/q\" strings, got {!r}".format(key, value)
        )
    return value


def _edge_list(doc):
    edges = doc["edges"]
    if not isinstance(edges, list):
        raise InstanceFormatException("Field 'edges' must be a list, got {!r}".format(edges))
    result = []
    for edge in edges:
        if not isinstance(edge, list) or len(edge) != 3:
            raise InstanceFormatException(
                "Every edge must be a [u, v, weight] list, got {!r}".format(edge)
            )
        u, v, w = edge
        for endpoint in (u, v):
            if isinstance(endpoint, bool) or not isinstance(endpoint, int):
                raise InstanceFormatException(
                    "Edge endpoints must be integers, got {!r}".format(edge)
                )
        result.append((u, v, _exact_number("edges", w)))
    return result


def _distance_matrix(doc, n):
    dist = doc["dist"]
    if not isinstance(dist, list) or len(dist) != n:
        raise InstanceFormatException("Field 'dist' must be an {0}x{0} matrix".format(n))
    for row in dist:
        if not isinstance(row, list) or len(row) != n:
            raise InstanceFormatException(
                "Every 'dist' row must be a list of {} entries, got {!r}".format(n, row)
            )
        for x in row:
            _exact_number("dist", x)
    return dist


def parse_instance(text: str) -> OnlineInstance:
    try:
        doc = json.loads(text)
    except ValueError as e:
        raise InstanceFormatException("Instance is not valid JSON: {}".format(e))
    if not isinstance(doc, dict):
        raise InstanceFormatException("Instance must be a JSON object")
    for key in ("kind", "n", "sites", "capacities", "requests"):
        if key not in doc:
            raise InstanceFormatException("Instance is missing field {!r}".format(key))
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InstanceFormatException("Field 'n' must be a positive integer, got {!r}".format(n))
    if ("edges" in doc) == ("dist" in doc):
        raise InstanceFormatException("Instance needs exactly one of 'edges' or 'dist'")
    try:
        if "edges" in doc:
            geometry = WeightedTree.from_edges(n, _edge_list(doc), root=doc.get("root", 0))
        else:
            geometry = MetricSpace(_distance_matrix(doc, n))
    except MetricValidationException as e:
        raise InstanceFormatException("Invalid geometry: {}".format(e))
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise InstanceFormatException("Field 'seed' must be an integer, got {!r}".format(seed))
    return OnlineInstance(
        geometry,
        _int_list(doc, "sites"),
        _int_list(doc, "capacities"),
        _int_list(doc, "requests"),
        kind=doc["kind"],
        seed=seed,
    )


def load_instance(path: str) -> OnlineInstance:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise InstanceFormatException("Cannot read instance {}: {}".format(path, e))
    return parse_instance(text)


def save_instance(instance: OnlineInstance, path: str) -> None:
    with open(path, "w") as f:
        f.write(serialize_instance(instance))


def normalize(space: MetricSpace) -> Tuple[MetricSpace, Fraction]:
    """Rescales the space so its minimum distance is exactly 1; returns (space, scale)."""
    scale = space.min_distance()
    if scale is None:
        return space, Fraction(1)
    return space.scaled(1 / scale), scale


def enumerate_sequences(positions: Iterable[int], k: int) -> Iterator[Tuple[int, ...]]:
    """All len(positions)**k request sequences, in lexicographic order."""
    return itertools.product(sorted(set(positions)), repeat=k)


def enumerate_small_trees(n: int, exponents: Iterable[int]) -> Iterator[WeightedTree]:
    """Every labeled tree on n vertices times every weighting 2**e, e in exponents; root 0."""
    if n < 1 or n > MAX_ENUMERATED_TREE_SIZE:
        raise InstanceFormatException(
            "Tree enumeration supports 1 <= n <= {}, got {}".format(MAX_ENUMERATED_TREE_SIZE, n)
        )
    exponents = sorted(set(exponents))
    if any(e < 0 for e in exponents):
        raise InstanceFormatException("Weight exponents must be >= 0, got {}".format(exponents))
    if n == 1:
        yield WeightedTree([None], [None], 0)
        return
    for sequence in itertools.product(range(n), repeat=n - 2):
        labeled = nx.from_prufer_sequence(list(sequence))
        shape = sorted((min(u, v), max(u, v)) for u, v in labeled.edges())
        for powers in itertools.product(exponents, repeat=n - 1):
            yield WeightedTree.from_edges(
                n, [(u, v, 1 << e) for (u, v), e in zip(shape, powers)], root=0
            )


class GeneratorConfig(object):
    """Parameters of a seeded instance; the same config always yields the same instance.

    exponents, when given, fixes the per-edge weight exponents of tree shapes instead of drawing
    them from [lo, hi].
    """

    def __init__(
        self,
        seed: int = 0,
        shape: str = "random-tree",
        n: int = 4,
        m: Optional[int] = None,
        k: Optional[int] = None,
        lo: int = 0,
        hi: int = 2,
        capacity_scheme: str = "unit",
        kind: Optional[str] = None,
        request_positions: Optional[str] = None,
        exponents: Optional[Sequence[int]] = None,
    ) -> None:
        self.seed = seed
        self.shape = shape
        self.n = n
        self.m = n if m is None else m
        self.k = self.m if k is None else k
        self.lo = lo
        self.hi = hi
        self.capacity_scheme = capacity_scheme
        self.kind = kind or self._default_kind()
        self.request_positions = request_positions or (
            "sites" if self.kind in ("OMM_S", "OMT_S2") else "all"
        )
        self.exponents = None if exponents is None else tuple(exponents)
        self.validate()

    def _default_kind(self):
        if self.shape != "random-metric" and self.m == self.n and self.capacity_scheme == "unit":
            return "OMT_S2"
        return "OTR"

    def validate(self) -> None:
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise InstanceFormatException("Seed must be an integer, got {!r}".format(self.seed))
        if not 0 <= self.seed < 2 ** 64:
            raise InstanceFormatException("Seed must fit in 64 bits, got {}".format(self.seed))
        if self.shape not in SHAPES:
            raise InstanceFormatException(
                "Unknown shape {!r}, expected one of: {}".format(self.shape, ", ".join(SHAPES))
            )
        if self.capacity_scheme not in CAPACITY_SCHEMES:
            raise InstanceFormatException(
                "Unknown capacity scheme {!r}, expected one of: {}".format(
                    self.capacity_scheme, ", ".join(CAPACITY_SCHEMES)
                )
            )
        if self.request_positions not in REQUEST_POSITIONS:
            raise InstanceFormatException(
                "Unknown request positions {!r}".format(self.request_positions)
            )
        if self.kind not in KINDS:
            raise InstanceFormatException("Unknown instance kind {!r}".format(self.kind))
        if self.n < 1:
            raise InstanceFormatException("n must be >= 1, got {}".format(self.n))
        if not 1 <= self.m <= self.n:
            raise InstanceFormatException(
                "Need 1 <= m <= n, got m={} with n={}".format(self.m, self.n)
            )
        if self.k < self.m:
            raise InstanceFormatException(
                "Every site needs capacity >= 1, so k >= m; got k={} m={}".format(self.k, self.m)
            )
        if self.lo < 0 or self.hi < self.lo:
            raise InstanceFormatException(
                "Need 0 <= lo <= hi for weight exponents, got [{}, {}]".format(self.lo, self.hi)
            )
        if self.capacity_scheme == "unit" and self.k != self.m:
            raise InstanceFormatException(
                "Unit capacities need k == m, got k={} m={}".format(self.k, self.m)
            )
        if self.capacity_scheme == "uniform" and self.k % self.m:
            raise InstanceFormatException(
                "Uniform capacities need m to divide k, got k={} m={}".format(self.k, self.m)
            )
        if self.request_positions == "off-site" and self.m == self.n:
            raise InstanceFormatException("Off-site requests need m < n")
        if self.exponents is not None and len(self.exponents) != self.n - 1:
            raise InstanceFormatException(
                "Need {} fixed exponents, got {}".format(self.n - 1, list(self.exponents))
            )

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "shape": self.shape,
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "lo": self.lo,
            "hi": self.hi,
            "capacity_scheme": self.capacity_scheme,
            "kind": self.kind,
            "request_positions": self.request_positions,
            "exponents": None if self.exponents is None else list(self.exponents),
        }


def _tree_shape(config, rng):
    n = config.n
    if n == 1:
        return []
    if config.shape == "path":
        return [(i, i + 1) for i in range(n - 1)]
    if config.shape == "star":
        return [(0, i) for i in range(1, n)]
    sequence = [rng.randrange(n) for _ in range(n - 2)]
    labeled = nx.from_prufer_sequence(sequence)
    return sorted((min(u, v), max(u, v)) for u, v in labeled.edges())


def _random_metric(config, rng):
    n = config.n
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            scale = 1 << rng.randint(config.lo, config.hi)
            graph.add_edge(i, j, weight=Fraction(rng.randint(1, 16), rng.randint(1, 4)) * scale)
    closure = dict(nx.all_pairs_dijkstra_path_length(graph, weight="weight"))
    return MetricSpace([[Fraction(closure[i][j]) for j in range(n)] for i in range(n)])


def _capacities(config, rng):
    m, k = config.m, config.k
    if config.capacity_scheme == "unit":
        return [1] * m
    if config.capacity_scheme == "uniform":
        return [k // m] * m
    cuts = sorted(rng.sample(range(1, k), m - 1))
    bounds = [0] + cuts + [k]
    return [bounds[i + 1] - bounds[i] for i in range(m)]


def generate(config: GeneratorConfig) -> OnlineInstance:
    rng = random.Random(config.seed)
    if config.shape == "random-metric":
        geometry = _random_metric(config, rng)
    else:
        shape = _tree_shape(config, rng)
        if config.exponents is not None:
            powers = list(config.exponents)
        else:
            powers = [rng.randint(config.lo, config.hi) for _ in shape]
        geometry = WeightedTree.from_edges(
            config.n, [(u, v, 1 << e) for (u, v), e in zip(shape, powers)], root=0
        )
    if config.m == config.n:
        sites = list(range(config.n))
    else:
        sites = sorted(rng.sample(range(config.n), config.m))
    capacities = _capacities(config, rng)
    if config.request_positions == "sites":
        positions = sites
    elif config.request_positions == "off-site":
        positions = sorted(set(range(config.n)) - set(sites))
    else:
        positions = list(range(config.n))
    requests = [rng.choice(positions) for _ in range(config.k)]
    instance = OnlineInstance(
        geometry, sites, capacities, requests, kind=config.kind, seed=config.seed
    )
    log.debug("Generated %s from seed %d", instance, config.seed)
    return instance
