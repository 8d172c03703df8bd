"""Subtree decomposition of a power-of-two weighted tree.

A node of the decomposition is a connected subtree of the original tree, identified by its root
and the bitmask of its vertices; parent pointers and weights are always those of the original
tree. Each node splits into

- T_0: the maximal root-containing subtree without an edge of the node's maximum weight,
- T_1..T_l: the subtrees hanging below T_0 from the heavy roots rho_1..rho_l (sorted by index),
- T^(1), T^(2): the two sides of the edge between the root and its lowest-index child rho^(2).

Children are built on first use and shared through a per-tree registry keyed by (root, mask), so
a walk from the top touches each node once and later walks reuse it.
"""

import bisect
import logging
from typing import FrozenSet, Iterable, List, Optional, Tuple

from .metric import WeightedTree

log = logging.getLogger(__name__)


class DecompositionException(Exception):
    pass


def vertex_mask(vertices: Iterable[int], n: int) -> int:
    """Bitmask with bit v set for every v in vertices."""
    buf = bytearray((n >> 3) + 1)
    for v in vertices:
        buf[v >> 3] |= 1 << (v & 7)
    return int.from_bytes(buf, "little")


def mask_vertices(mask: int) -> List[int]:
    """The set bits of mask in ascending order."""
    result = []
    while mask:
        low = mask & -mask
        result.append(low.bit_length() - 1)
        mask ^= low
    return result


class _Registry(object):
    def __init__(self, tree):
        self.tree = tree
        self.subtree_masks = tree.subtree_masks()
        # edge weights are powers of two; levels[v] is the exponent of the edge above v
        self.levels = [None if w is None else w.numerator.bit_length() - 1 for w in tree.weight]
        by_level = {}
        for v, level in enumerate(self.levels):
            if level is not None:
                by_level[level] = by_level.get(level, 0) | (1 << v)
        self.level_classes = sorted(by_level.items(), reverse=True)
        self._nodes = {}

    def node(self, root, mask):
        key = (root, mask)
        node = self._nodes.get(key)
        if node is None:
            node = Decomposition(self, root, mask)
            self._nodes[key] = node
        return node

    def __len__(self):
        return len(self._nodes)


class Decomposition(object):
    def __init__(self, registry, root, mask):
        self._registry = registry
        self.tree = registry.tree
        self.root = root
        self.mask = mask
        self.is_leaf = mask == 1 << root
        self._t0_child = None
        self._part_children = {}
        self._side_children = {}
        if self.is_leaf:
            self.max_level = None
            self.t0_mask = mask
            self.heavy_roots = ()
            self.heavy_masks = ()
            self.split_child = None
            self.side_masks = (mask, 0)
            self._heavy_tins = []
            self._heavy_by_tin = []
            return

        tree = self.tree
        members = mask & ~(1 << root)
        self.max_level = next(level for level, cls in registry.level_classes if members & cls)

        t0_mask = 1 << root
        heavy = []
        stack = [root]
        while stack:
            v = stack.pop()
            for c in tree.children[v]:
                if not (mask >> c) & 1:
                    continue
                if registry.levels[c] == self.max_level:
                    heavy.append(c)
                else:
                    t0_mask |= 1 << c
                    stack.append(c)
        self.t0_mask = t0_mask
        self.heavy_roots = tuple(sorted(heavy))
        self.heavy_masks = tuple(mask & registry.subtree_masks[h] for h in self.heavy_roots)
        self._part_index = {h: i + 1 for i, h in enumerate(self.heavy_roots)}
        self._heavy_by_tin = sorted(self.heavy_roots, key=lambda h: tree.tin[h])
        self._heavy_tins = [tree.tin[h] for h in self._heavy_by_tin]

        self.split_child = next(c for c in tree.children[root] if (mask >> c) & 1)
        side2 = mask & registry.subtree_masks[self.split_child]
        self.side_masks = (mask & ~side2, side2)

    def __repr__(self):
        return "Decomposition(root={}, vertices={})".format(self.root, mask_vertices(self.mask))

    @property
    def max_weight(self) -> Optional[int]:
        return None if self.is_leaf else 1 << self.max_level

    @property
    def vertices(self) -> FrozenSet[int]:
        return frozenset(mask_vertices(self.mask))

    @property
    def t0_vertices(self) -> FrozenSet[int]:
        return frozenset(mask_vertices(self.t0_mask))

    @property
    def heavy_subtrees(self) -> Tuple[FrozenSet[int], ...]:
        return tuple(frozenset(mask_vertices(m)) for m in self.heavy_masks)

    @property
    def side1(self) -> FrozenSet[int]:
        return frozenset(mask_vertices(self.side_masks[0]))

    @property
    def side2(self) -> FrozenSet[int]:
        return frozenset(mask_vertices(self.side_masks[1]))

    def part_of(self, v: int) -> int:
        """0 if v is in T_0, otherwise the index i of the T_i holding v."""
        tin = self.tree.tin[v]
        idx = bisect.bisect_right(self._heavy_tins, tin) - 1
        if idx >= 0:
            h = self._heavy_by_tin[idx]
            if tin <= self.tree.tout[h]:
                return self._part_index[h]
        return 0

    def part_mask(self, i: int) -> int:
        return self.t0_mask if i == 0 else self.heavy_masks[i - 1]

    def side_of(self, v: int) -> int:
        split = self.split_child
        if self.tree.tin[split] <= self.tree.tin[v] <= self.tree.tout[split]:
            return 2
        return 1

    def side_mask(self, j: int) -> int:
        return self.side_masks[j - 1]

    def side_root(self, j: int) -> int:
        return self.root if j == 1 else self.split_child

    def heavy_parent(self, i: int) -> int:
        """par(rho_i), the T_0 vertex a request from T_i is re-rooted to."""
        return self.tree.parent[self.heavy_roots[i - 1]]

    def t0_child(self) -> "Decomposition":
        if self._t0_child is None:
            self._t0_child = self._registry.node(self.root, self.t0_mask)
        return self._t0_child

    def part_child(self, i: int) -> "Decomposition":
        if i == 0:
            return self.t0_child()
        child = self._part_children.get(i)
        if child is None:
            child = self._registry.node(self.heavy_roots[i - 1], self.heavy_masks[i - 1])
            self._part_children[i] = child
        return child

    def side_child(self, j: int) -> "Decomposition":
        child = self._side_children.get(j)
        if child is None:
            child = self._registry.node(self.side_root(j), self.side_mask(j))
            self._side_children[j] = child
        return child


def decompose(tree: WeightedTree) -> Decomposition:
    """Top node of the decomposition of a power-of-two weighted tree.

    A single-vertex tree yields a leaf node (is_leaf is True), which is the recursion's base case.
    """
    if not tree.is_power_of_two:
        raise DecompositionException(
            "Subtree decomposition needs power-of-two edge weights, got {}".format(
                sorted({str(w) for _, _, w in tree.edges()})
            )
        )
    registry = _Registry(tree)
    node = registry.node(tree.root, (1 << tree.n) - 1)
    log.debug("Decomposed tree with %d vertices rooted at %d", tree.n, tree.root)
    return node
