"""Exact finite metrics and rooted, edge-weighted trees.

Everything here works on fractions.Fraction so that the bound checks further up can compare
costs without tolerance. Trees carry Euler-tour indices and binary-lifting tables so that
lca, path distance and max-weight distance are O(log n) queries.
"""

import logging
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

from networkx.utils import UnionFind

log = logging.getLogger(__name__)


class MetricValidationException(Exception):
    pass


def to_fraction(value: Union[int, str, Fraction]) -> Fraction:
    """Converts an int, Fraction or "p/q" string to a Fraction. Floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise MetricValidationException("Expected an exact number, got {!r}".format(value))
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise MetricValidationException("Malformed exact number: {!r}".format(value))
    raise MetricValidationException("Expected an exact number, got {!r}".format(value))


def format_exact(value: Union[int, Fraction]) -> str:
    """Renders a Fraction as "p/q", or "p" when the denominator is 1."""
    return str(Fraction(value))


def _check_vertex(n: int, v: int) -> None:
    if isinstance(v, bool) or not isinstance(v, int) or v < 0 or v >= n:
        raise MetricValidationException("Index {!r} out of range [0, {})".format(v, n))


class MetricSpace(object):
    def __init__(self, dist: Sequence[Sequence], validate: bool = True) -> None:
        for row in dist:
            if not isinstance(row, (list, tuple)):
                raise MetricValidationException(
                    "Distance matrix rows must be lists, got {!r}".format(row)
                )
        self._dist = tuple(tuple(to_fraction(x) for x in row) for row in dist)
        self.n = len(self._dist)
        if validate:
            self.validate()

    def __eq__(self, other):
        return isinstance(other, MetricSpace) and self._dist == other._dist

    def __repr__(self):
        return "MetricSpace(n={})".format(self.n)

    @property
    def dist(self) -> Tuple[Tuple[Fraction, ...], ...]:
        return self._dist

    def points(self) -> range:
        return range(self.n)

    def distance(self, u: int, v: int) -> Fraction:
        _check_vertex(self.n, u)
        _check_vertex(self.n, v)
        return self._dist[u][v]

    def min_distance(self) -> Optional[Fraction]:
        """Smallest off-diagonal distance, or None for fewer than two points."""
        if self.n < 2:
            return None
        return min(self._dist[i][j] for i in range(self.n) for j in range(i + 1, self.n))

    def restricted_to(self, points: Iterable[int]) -> "MetricSpace":
        points = list(points)
        for p in points:
            _check_vertex(self.n, p)
        return MetricSpace([[self._dist[u][v] for v in points] for u in points], validate=False)

    def scaled(self, factor: Union[int, Fraction]) -> "MetricSpace":
        factor = Fraction(factor)
        return MetricSpace([[x * factor for x in row] for row in self._dist], validate=False)

    def validate(self) -> None:
        n = self.n
        for i, row in enumerate(self._dist):
            if len(row) != n:
                raise MetricValidationException(
                    "Distance matrix is not square: row {} has {} entries, expected {}".format(
                        i, len(row), n
                    )
                )
        for i in range(n):
            if self._dist[i][i] != 0:
                raise MetricValidationException(
                    "dist({0},{0}) = {1}, expected 0".format(i, self._dist[i][i])
                )
            for j in range(i + 1, n):
                if self._dist[i][j] != self._dist[j][i]:
                    raise MetricValidationException(
                        "Asymmetric distance: dist({0},{1}) = {2} but dist({1},{0}) = {3}".format(
                            i, j, self._dist[i][j], self._dist[j][i]
                        )
                    )
                if self._dist[i][j] <= 0:
                    raise MetricValidationException(
                        "Distinct points {} and {} are at distance {}".format(
                            i, j, self._dist[i][j]
                        )
                    )
        for j in range(n):
            row_j = self._dist[j]
            for i in range(n):
                d_ij = self._dist[i][j]
                row_i = self._dist[i]
                for k in range(n):
                    if row_i[k] > d_ij + row_j[k]:
                        raise MetricValidationException(
                            "Triangle inequality fails: dist({0},{2}) = {3} > dist({0},{1}) + "
                            "dist({1},{2}) = {4}".format(i, j, k, row_i[k], d_ij + row_j[k])
                        )


def is_power_of_two(weight: Union[int, Fraction]) -> bool:
    weight = Fraction(weight)
    if weight.denominator != 1 or weight.numerator < 1:
        return False
    return weight.numerator & (weight.numerator - 1) == 0


class WeightedTree(object):
    """A rooted tree on vertices 0..n-1.

    parents[root] and weights[root] are None; weights[v] is the weight of the edge (v, parents[v]).
    """

    @staticmethod
    def from_edges(n: int, edges: Iterable[Sequence], root: int = 0) -> "WeightedTree":
        """Orients an undirected edge list away from root, visiting children in ascending order."""
        if n < 1:
            raise MetricValidationException("A tree needs at least one vertex, got n={}".format(n))
        _check_vertex(n, root)
        edges = list(edges)
        if len(edges) != n - 1:
            raise MetricValidationException(
                "A tree on {} vertices has {} edges, got {}".format(n, n - 1, len(edges))
            )
        adjacency = [[] for _ in range(n)]
        for edge in edges:
            if not isinstance(edge, (list, tuple)) or len(edge) != 3:
                raise MetricValidationException("Malformed edge: {!r}".format(edge))
            u, v, w = edge
            _check_vertex(n, u)
            _check_vertex(n, v)
            if u == v:
                raise MetricValidationException("Self loop at vertex {}".format(u))
            w = to_fraction(w)
            adjacency[u].append((v, w))
            adjacency[v].append((u, w))
        parents = [None] * n
        weights = [None] * n
        seen = [False] * n
        seen[root] = True
        frontier = [root]
        while frontier:
            next_frontier = []
            for u in frontier:
                for v, w in sorted(adjacency[u], key=lambda vw: vw[0]):
                    if seen[v]:
                        continue
                    seen[v] = True
                    parents[v] = u
                    weights[v] = w
                    next_frontier.append(v)
            frontier = next_frontier
        if not all(seen):
            missing = [v for v in range(n) if not seen[v]]
            raise MetricValidationException(
                "Edges do not connect the tree: unreachable from root {}: {}".format(root, missing)
            )
        return WeightedTree(parents, weights, root)

    def __init__(self, parents: Sequence[Optional[int]], weights: Sequence, root: int = 0) -> None:
        n = len(parents)
        if n < 1 or len(weights) != n:
            raise MetricValidationException(
                "Need one parent and one weight entry per vertex, got {} and {}".format(
                    len(parents), len(weights)
                )
            )
        _check_vertex(n, root)
        self.n = n
        self.root = root
        self.parent = tuple(parents)
        self.weight = tuple(None if w is None else to_fraction(w) for w in weights)
        if self.parent[root] is not None:
            raise MetricValidationException("Root {} must not have a parent".format(root))

        children = [[] for _ in range(n)]
        for v in range(n):
            if v == root:
                continue
            p = self.parent[v]
            if p is None:
                raise MetricValidationException(
                    "Vertex {} has no parent but is not the root".format(v)
                )
            _check_vertex(n, p)
            if self.weight[v] is None or self.weight[v] <= 0:
                raise MetricValidationException(
                    "Edge ({}, {}) must have a positive weight, got {}".format(v, p, self.weight[v])
                )
            children[p].append(v)
        self.children = tuple(tuple(sorted(c)) for c in children)

        # preorder from the root; any vertex missing from it sits on a parent cycle
        preorder = []
        stack = [root]
        while stack:
            v = stack.pop()
            preorder.append(v)
            stack.extend(reversed(self.children[v]))
        if len(preorder) != n:
            raise MetricValidationException(
                "Parent relation has a cycle: only {} of {} vertices reach root {}".format(
                    len(preorder), n, root
                )
            )
        self.preorder = tuple(preorder)

        depth = [0] * n
        root_distance = [Fraction(0)] * n
        for v in preorder:
            if v != root:
                depth[v] = depth[self.parent[v]] + 1
                root_distance[v] = root_distance[self.parent[v]] + self.weight[v]
        self.depth = tuple(depth)
        self.root_distance = tuple(root_distance)

        size = [1] * n
        for v in reversed(preorder):
            if v != root:
                size[self.parent[v]] += size[v]
        tin = [0] * n
        for i, v in enumerate(preorder):
            tin[v] = i
        self.tin = tuple(tin)
        self.tout = tuple(tin[v] + size[v] - 1 for v in range(n))

        levels = max(1, n.bit_length())
        up = [[root if v == root else self.parent[v] for v in range(n)]]
        up_max = [[Fraction(0) if v == root else self.weight[v] for v in range(n)]]
        for j in range(1, levels):
            prev, prev_max = up[j - 1], up_max[j - 1]
            up.append([prev[prev[v]] for v in range(n)])
            up_max.append([max(prev_max[v], prev_max[prev[v]]) for v in range(n)])
        self._up = up
        self._up_max = up_max
        self._subtree_masks = None

    def __eq__(self, other):
        return (
            isinstance(other, WeightedTree)
            and self.root == other.root
            and self.parent == other.parent
            and self.weight == other.weight
        )

    def __repr__(self):
        return "WeightedTree(n={}, root={}, edges={})".format(
            self.n, self.root, [(v, p, format_exact(w)) for v, p, w in self.edges()]
        )

    def points(self) -> range:
        return range(self.n)

    def edges(self) -> Iterator[Tuple[int, int, Fraction]]:
        """Yields (child, parent, weight) for every edge, by child index."""
        for v in range(self.n):
            if v != self.root:
                yield v, self.parent[v], self.weight[v]

    @property
    def max_weight(self) -> Fraction:
        return max((w for _, _, w in self.edges()), default=Fraction(0))

    @property
    def is_power_of_two(self) -> bool:
        return all(is_power_of_two(w) for _, _, w in self.edges())

    def is_ancestor(self, a: int, v: int) -> bool:
        """True if a is v or lies on the path from v to the root."""
        return self.tin[a] <= self.tin[v] <= self.tout[a]

    def lca(self, u: int, v: int) -> int:
        _check_vertex(self.n, u)
        _check_vertex(self.n, v)
        if self.is_ancestor(u, v):
            return u
        if self.is_ancestor(v, u):
            return v
        for j in range(len(self._up) - 1, -1, -1):
            candidate = self._up[j][u]
            if not self.is_ancestor(candidate, v):
                u = candidate
        return self._up[0][u]

    def _max_to_ancestor(self, v, steps):
        best = Fraction(0)
        j = 0
        while steps:
            if steps & 1:
                best = max(best, self._up_max[j][v])
                v = self._up[j][v]
            steps >>= 1
            j += 1
        return best

    def path_distance(self, u: int, v: int) -> Fraction:
        ancestor = self.lca(u, v)
        return self.root_distance[u] + self.root_distance[v] - 2 * self.root_distance[ancestor]

    def max_weight_distance(self, u: int, v: int) -> Fraction:
        ancestor = self.lca(u, v)
        return max(
            self._max_to_ancestor(u, self.depth[u] - self.depth[ancestor]),
            self._max_to_ancestor(v, self.depth[v] - self.depth[ancestor]),
        )

    # trees are used as instance geometries; their cost is the path distance
    distance = path_distance

    def subtree_masks(self) -> List[int]:
        """Per-vertex bitmask of the vertices in its subtree."""
        if self._subtree_masks is None:
            masks = [1 << v for v in range(self.n)]
            for v in reversed(self.preorder):
                if v != self.root:
                    masks[self.parent[v]] |= masks[v]
            self._subtree_masks = masks
        return self._subtree_masks

    def steiner_vertices(self, vertices: Iterable[int]) -> Set[int]:
        """Vertex set of the minimal subtree containing all of the given vertices."""
        vertices = list(vertices)
        if not vertices:
            return set()
        top = vertices[0]
        for v in vertices[1:]:
            top = self.lca(top, v)
        result = {top}
        for v in vertices:
            while v not in result:
                result.add(v)
                v = self.parent[v]
        return result

    def restricted_to(self, vertices: Iterable[int], root: int) -> Tuple["WeightedTree", List[int]]:
        """The subtree induced by a connected vertex set that hangs from root.

        Vertices are relabeled in ascending original order; returns (tree, labels) where
        labels[i] is the original vertex of new vertex i.
        """
        labels = sorted(set(vertices))
        if root not in labels:
            raise MetricValidationException("Root {} is not in the vertex set".format(root))
        index = {v: i for i, v in enumerate(labels)}
        parents = [None] * len(labels)
        weights = [None] * len(labels)
        for i, v in enumerate(labels):
            if v == root:
                continue
            p = self.parent[v]
            if p not in index:
                raise MetricValidationException(
                    "Vertex set does not hang from {}: parent {} of {} is missing".format(
                        root, p, v
                    )
                )
            parents[i] = index[p]
            weights[i] = self.weight[v]
        return WeightedTree(parents, weights, index[root]), labels


def tree_metric(tree: WeightedTree) -> MetricSpace:
    """The path-distance matrix of a tree as a MetricSpace."""
    return MetricSpace(
        [[tree.path_distance(u, v) for v in range(tree.n)] for u in range(tree.n)], validate=False
    )


def mst_of_metric(space: MetricSpace) -> WeightedTree:
    """Kruskal over the complete graph of the space, ties broken by (weight, min, max); root 0."""
    n = space.n
    if n < 1:
        raise MetricValidationException("Cannot span an empty metric space")
    candidates = sorted(
        (space.dist[i][j], i, j) for i in range(n) for j in range(i + 1, n)
    )
    components = UnionFind(range(n))
    tree_edges = []
    for w, i, j in candidates:
        if components[i] != components[j]:
            components.union(i, j)
            tree_edges.append((i, j, w))
            if len(tree_edges) == n - 1:
                break
    log.debug("MST over %d points: %s", n, tree_edges)
    return WeightedTree.from_edges(n, tree_edges, root=0)


def round_up_to_power_of_two(weight: Union[int, Fraction]) -> Fraction:
    weight = Fraction(weight)
    if weight < 1:
        raise MetricValidationException(
            "Cannot round weight {} < 1; normalize the metric first".format(weight)
        )
    ceiling = -(-weight.numerator // weight.denominator)
    return Fraction(1 << (ceiling - 1).bit_length())


def round_to_power_of_two(tree: WeightedTree) -> WeightedTree:
    weights = [None if w is None else round_up_to_power_of_two(w) for w in tree.weight]
    return WeightedTree(tree.parent, weights, tree.root)


def four_point_sides(
    tree: WeightedTree, rho: int, v1: int, v2: int, v3: int, v4: int
) -> Tuple[Fraction, Fraction]:
    """Both sides of the four-point identity for a common ancestor rho of v1..v4."""
    for v in (v1, v2, v3, v4):
        if not tree.is_ancestor(rho, v):
            raise MetricValidationException(
                "{} is not a common ancestor: it is not above {}".format(rho, v)
            )
    d = tree.path_distance
    lhs = -d(v1, v2) - d(v3, v4) + d(v1, v3) + d(v2, v4)
    rhs = 2 * (
        d(tree.lca(v1, v2), rho)
        + d(tree.lca(v3, v4), rho)
        - d(tree.lca(v1, v3), rho)
        - d(tree.lca(v2, v4), rho)
    )
    return lhs, rhs
