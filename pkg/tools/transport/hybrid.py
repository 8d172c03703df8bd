"""Hybrid algorithms, cavity traces and the checks built on them.

A hybrid (A, t_d, a_d) follows the MPFS algorithm A, except that the t_d-th request is sent to
a_d when a_d is free. On unit-capacity instances the free sets of A and of the hybrid differ by
exactly one site on each side from t_d until the coupling time t_c: the H-cavity h_t (free for
the hybrid only) and the A-cavity a_t (free for A only). Cavities are read off the two free-set
traces and every structural property is then checked against them.

Checkers return Finding records, or None when their premise does not hold for the given input.
"""

import collections
import logging
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Set, Tuple

from .algorithms import BStar, CapacityException, NearestSiteLift, SubtreeDecomposition
from .decomposition import Decomposition, decompose
from .instance import OnlineInstance
from .metric import WeightedTree
from .online import AssignmentTrace, MpfsAlgorithm, OnlineAlgorithm, run_online
from .report import Finding

log = logging.getLogger(__name__)


class CavityInvariantException(Exception):
    pass


class HybridSpecException(Exception):
    pass


CostFunction = Callable[[int, int], Fraction]
TracePair = Tuple[AssignmentTrace, AssignmentTrace]

HybridSpec = collections.namedtuple("HybridSpec", ["base", "t_d", "a_d"])


class HybridAlgorithm(OnlineAlgorithm):
    name = "hybrid"

    def __init__(self, spec: HybridSpec) -> None:
        self.spec = spec

    def assign(self, history, request, free):
        if len(history) + 1 == self.spec.t_d and self.spec.a_d in free:
            return self.spec.a_d
        return self.spec.base.assign(history, request, free)


class CavityTrace(object):
    """h[i] and a[i] are the cavities at time t_d + i, for t_d <= t <= t_c.

    free_A[t] and free_H[t] are the free sets after t requests, t = 0..k.
    """

    def __init__(
        self,
        valid: bool,
        t_d: int,
        a_d: int,
        t_c: Optional[int],
        h: Sequence[int],
        a: Sequence[int],
        free_A: Sequence[frozenset],
        free_H: Sequence[frozenset],
    ) -> None:
        self.valid = valid
        self.t_d = t_d
        self.a_d = a_d
        self.t_c = t_c
        self.h = tuple(h)
        self.a = tuple(a)
        self.free_A = tuple(free_A)
        self.free_H = tuple(free_H)

    def __repr__(self):
        return "CavityTrace(valid={}, t_d={}, a_d={}, t_c={}, h={}, a={})".format(
            self.valid, self.t_d, self.a_d, self.t_c, list(self.h), list(self.a)
        )

    def h_at(self, t: int) -> int:
        return self.h[t - self.t_d]

    def a_at(self, t: int) -> int:
        return self.a[t - self.t_d]

    def cavities(self) -> frozenset:
        return frozenset(self.h) | frozenset(self.a)

    def cavities_from(self, t: int) -> frozenset:
        """Cav_t: the cavities of both kinds at times t..t_c."""
        start = max(0, t - self.t_d)
        return frozenset(self.h[start:]) | frozenset(self.a[start:])

    def move_times(self) -> List[int]:
        """Times t in (t_d, t_c] at which one of the cavities moves."""
        return [
            t
            for t in range(self.t_d + 1, self.t_c + 1)
            if self.h_at(t - 1) != self.h_at(t) or self.a_at(t - 1) != self.a_at(t)
        ]


def _single(values, t, label):
    if len(values) != 1:
        raise CavityInvariantException(
            "Expected exactly one {} cavity at time {}, got {}".format(label, t, sorted(values))
        )
    return next(iter(values))


def run_hybrid(
    instance: OnlineInstance, spec: HybridSpec
) -> Tuple[AssignmentTrace, AssignmentTrace, CavityTrace]:
    """Runs spec.base and its hybrid side by side; returns (trace_A, trace_H, cavity_trace)."""
    if not instance.is_unit_capacity():
        raise CapacityException(
            "Cavity tracing needs unit capacities, got {}".format(list(instance.capacities))
        )
    k = instance.k
    if not 1 <= spec.t_d <= k:
        raise HybridSpecException("Decoupling time {} is outside [1, {}]".format(spec.t_d, k))
    if spec.a_d not in instance.sites:
        raise HybridSpecException("Decoupling server {} is not a site".format(spec.a_d))

    trace_A = run_online(instance, spec.base)
    trace_H = run_online(instance, HybridAlgorithm(spec))
    free_A = [trace_A.free_after(t) for t in range(k + 1)]
    free_H = [trace_H.free_after(t) for t in range(k + 1)]

    for t in range(spec.t_d):
        if free_A[t] != free_H[t]:
            raise CavityInvariantException("Free sets differ at time {} < t_d".format(t))

    valid = spec.a_d in free_A[spec.t_d - 1] and trace_A.site_at(spec.t_d) != spec.a_d
    if not valid:
        log.debug("Hybrid t_d=%d a_d=%s is not valid on %s", spec.t_d, spec.a_d, instance)
        cav = CavityTrace(False, spec.t_d, spec.a_d, None, (), (), free_A, free_H)
        return trace_A, trace_H, cav

    h, a = [], []
    t_c = None
    for t in range(spec.t_d, k + 1):
        only_H = free_H[t] - free_A[t]
        only_A = free_A[t] - free_H[t]
        if not only_H and not only_A:
            t_c = t - 1
            break
        h.append(_single(only_H, t, "H"))
        a.append(_single(only_A, t, "A"))
    if t_c is None or t_c < spec.t_d:
        raise CavityInvariantException(
            "No coupling time found for t_d={} a_d={}".format(spec.t_d, spec.a_d)
        )
    for t in range(t_c + 1, k + 1):
        if free_A[t] != free_H[t]:
            raise CavityInvariantException(
                "Free sets split again at time {} after coupling at {}".format(t, t_c)
            )
    if h[0] != trace_A.site_at(spec.t_d) or a[0] != spec.a_d:
        raise CavityInvariantException(
            "First cavities ({}, {}) are not (A's choice {}, a_d {})".format(
                h[0], a[0], trace_A.site_at(spec.t_d), spec.a_d
            )
        )
    return trace_A, trace_H, CavityTrace(True, spec.t_d, spec.a_d, t_c, h, a, free_A, free_H)


def ring_length(points: Sequence[int], cost: CostFunction) -> Fraction:
    """Length of the closed walk through points in order."""
    points = list(points)
    if not points:
        return Fraction(0)
    total = cost(points[0], points[-1])
    for u, v in zip(points, points[1:]):
        total += cost(u, v)
    return Fraction(total)


def hybrid_cycle_length(cav: CavityTrace, cost: CostFunction) -> Fraction:
    if not cav.valid:
        raise HybridSpecException("The hybrid instance is not valid: {}".format(cav))
    return ring_length(list(cav.h) + list(reversed(cav.a)), cost)


def _describe(spec):
    return "t_d={} a_d={}".format(spec.t_d, spec.a_d)


def check_cycle_cost_bound(
    traces: TracePair, cav: CavityTrace, cost: CostFunction
) -> Optional[Finding]:
    """A(I) - H(I) <= length of the hybrid cycle."""
    if not cav.valid:
        return None
    trace_A, trace_H = traces
    difference = trace_A.cost_under(cost) - trace_H.cost_under(cost)
    return Finding.compare(
        "cycle-cost", difference, hybrid_cycle_length(cav, cost), "t_c={}".format(cav.t_c)
    )


def check_step_properties(traces: TracePair, cav: CavityTrace) -> Optional[Finding]:
    """How cavities move and what both runs assign at each step until one step past t_c."""
    if not cav.valid:
        return None
    trace_A, trace_H = traces
    problems = []
    for t in range(cav.t_d + 1, cav.t_c + 1):
        h_prev, h_now = cav.h_at(t - 1), cav.h_at(t)
        a_prev, a_now = cav.a_at(t - 1), cav.a_at(t)
        s_A, s_H = trace_A.site_at(t), trace_H.site_at(t)
        if h_prev != h_now and a_prev != a_now:
            problems.append("both cavities move at t={}".format(t))
        elif h_prev != h_now and (s_A, s_H) != (h_now, h_prev):
            problems.append("H-cavity move at t={} but assignments {}".format(t, (s_A, s_H)))
        elif a_prev != a_now and (s_A, s_H) != (a_prev, a_now):
            problems.append("A-cavity move at t={} but assignments {}".format(t, (s_A, s_H)))
        elif h_prev == h_now and a_prev == a_now and s_A != s_H:
            problems.append("no move at t={} but assignments {}".format(t, (s_A, s_H)))
    t = cav.t_c + 1
    if t <= len(trace_A):
        expected = (cav.a_at(cav.t_c), cav.h_at(cav.t_c))
        if (trace_A.site_at(t), trace_H.site_at(t)) != expected:
            problems.append(
                "coupling step t={} assigns {} instead of {}".format(
                    t, (trace_A.site_at(t), trace_H.site_at(t)), expected
                )
            )
    return Finding.holds("step-properties", not problems, "; ".join(problems))


def conjugate_of(instance: OnlineInstance, spec: HybridSpec) -> Tuple[OnlineInstance, HybridSpec]:
    """Replaces the request at t_d by a_d and decouples towards h_{t_d} instead."""
    _, _, cav = run_hybrid(instance, spec)
    if not cav.valid:
        raise HybridSpecException(
            "Only valid hybrid instances have a conjugate ({})".format(_describe(spec))
        )
    requests = list(instance.requests)
    requests[spec.t_d - 1] = spec.a_d
    return instance.with_requests(requests), HybridSpec(spec.base, spec.t_d, cav.h[0])


def check_conjugate(instance: OnlineInstance, spec: HybridSpec) -> Optional[Finding]:
    _, _, cav = run_hybrid(instance, spec)
    if not cav.valid:
        return None
    conjugate, conjugate_spec = conjugate_of(instance, spec)
    _, _, swapped = run_hybrid(conjugate, conjugate_spec)
    ok = (
        swapped.valid
        and swapped.t_c == cav.t_c
        and swapped.h == cav.a
        and swapped.a == cav.h
        and swapped.cavities() == cav.cavities()
    )
    return Finding.holds(
        "conjugate", ok, "{} against conjugate {}".format(cav, swapped) if not ok else ""
    )


def make_well_behaved(
    instance: OnlineInstance, spec: HybridSpec
) -> Tuple[OnlineInstance, HybridSpec]:
    """Hybrid instance with the same cavity moves: co-located requests fill every non-cavity
    site first, then the requests at t_d, at every move time and at t_c + 1 follow."""
    _, _, cav = run_hybrid(instance, spec)
    if not cav.valid:
        raise HybridSpecException("Only valid hybrid instances can be made well-behaved")
    times = [cav.t_d] + cav.move_times() + [cav.t_c + 1]
    n = len(times) - 1
    cavities = cav.cavities()
    if len(cavities) != n + 1:
        raise CavityInvariantException(
            "{} cavity moves produced {} cavities, expected {}".format(
                n - 1, len(cavities), n + 1
            )
        )
    prefix = sorted(set(instance.sites) - cavities)
    requests = prefix + [instance.requests[t - 1] for t in times]
    return instance.with_requests(requests), HybridSpec(spec.base, instance.k - n, spec.a_d)


def is_well_behaved(instance: OnlineInstance, spec: HybridSpec) -> bool:
    trace_A, trace_H, cav = run_hybrid(instance, spec)
    k = instance.k
    if not cav.valid or cav.t_c != k - 1:
        return False
    cost = instance.geometry.distance
    if any(cost(instance.requests[t - 1], trace_A.site_at(t)) != 0 for t in range(1, cav.t_d)):
        return False
    for t in range(cav.t_d, k):
        remaining = cav.cavities_from(t)
        if trace_A.free_after(t) != remaining - {cav.h_at(t)}:
            return False
        if trace_H.free_after(t) != remaining - {cav.a_at(t)}:
            return False
    return True


def partial_cycle_of(
    instance: OnlineInstance, spec: HybridSpec, t1: int, t2: int
) -> Tuple[OnlineInstance, HybridSpec]:
    """Hybrid instance whose cavities are exactly h_{t1}..h_{t2} (pairwise distinct)."""
    _, _, cav = run_hybrid(instance, spec)
    if not cav.valid:
        raise HybridSpecException("Only valid hybrid instances have partial cycles")
    if not cav.t_d <= t1 < t2 <= cav.t_c:
        raise HybridSpecException(
            "Need t_d <= t1 < t2 <= t_c, got t1={} t2={} with t_d={} t_c={}".format(
                t1, t2, cav.t_d, cav.t_c
            )
        )
    segment = [cav.h_at(t) for t in range(t1, t2 + 1)]
    if len(set(segment)) != len(segment):
        raise HybridSpecException(
            "H-cavities {} between {} and {} repeat".format(segment, t1, t2)
        )
    prefix = sorted(set(instance.sites) - set(segment))
    requests = prefix + [segment[0]] + [instance.requests[t - 1] for t in range(t1 + 1, t2 + 1)]
    return (
        instance.with_requests(requests),
        HybridSpec(spec.base, len(prefix) + 1, segment[-1]),
    )


def _longest_distinct_prefix(cav):
    seen = set()
    end = None
    for t in range(cav.t_d, cav.t_c + 1):
        if cav.h_at(t) in seen:
            break
        seen.add(cav.h_at(t))
        end = t
    return end


def check_partial_cycle(
    instance: OnlineInstance, spec: HybridSpec, cost: CostFunction
) -> Optional[Finding]:
    """The H-cavity run from t_d up to its first repeat is reproduced as a whole cycle."""
    _, _, cav = run_hybrid(instance, spec)
    if not cav.valid:
        return None
    t2 = _longest_distinct_prefix(cav)
    if t2 is None or t2 <= cav.t_d:
        return None
    segment = [cav.h_at(t) for t in range(cav.t_d, t2 + 1)]
    partial, partial_spec = partial_cycle_of(instance, spec, cav.t_d, t2)
    _, _, partial_cav = run_hybrid(partial, partial_spec)
    ok = (
        partial_cav.valid
        and partial_cav.cavities() == frozenset(segment)
        and partial_cav.h[0] == segment[0]
        and hybrid_cycle_length(partial_cav, cost) == ring_length(segment, cost)
    )
    return Finding.holds("partial-cycle", ok, "segment {} gave {}".format(segment, partial_cav))


def _is_identity_sd(alg, instance):
    return (
        isinstance(alg, SubtreeDecomposition)
        and not isinstance(alg, BStar)
        and instance.is_tree
        and alg.tree == instance.geometry
        and alg.labels == tuple(range(instance.n))
    )


def _cavity_tree(tree, cavities):
    """(vertices, root, edge weights) of the minimal subtree spanning the cavities."""
    vertices = tree.steiner_vertices(cavities)
    root = next(v for v in vertices if tree.parent[v] not in vertices)
    return vertices, root, [tree.weight[v] for v in vertices if v != root]


def _edge_potential(weights):
    return len(weights) * max(weights) if weights else Fraction(0)


def check_main_bound(instance: OnlineInstance, spec: HybridSpec) -> List[Finding]:
    """Two findings for SD on a power-of-two tree: the cycle length against the edge potential of
    the cavity tree T_H, and d^max(h_{t_d}, a_d) against the heaviest edge of T_H."""
    _, _, cav = run_hybrid(instance, spec)
    if not cav.valid:
        return []
    tree = instance.geometry
    vertices, rho, weights = _cavity_tree(tree, cav.cavities())
    ring = hybrid_cycle_length(cav, tree.path_distance)
    rhs = 2 * _edge_potential(weights) - 2 * tree.path_distance(tree.lca(cav.h[0], cav.a_d), rho)
    return [
        Finding.compare(
            "main-bound", ring, rhs, "T_H={} rho_H={}".format(sorted(vertices), rho)
        ),
        Finding.equal(
            "cavity-tree-max-weight",
            tree.max_weight_distance(cav.h[0], cav.a_d),
            max(weights),
            "h={} a_d={}".format(cav.h[0], cav.a_d),
        ),
    ]


def check_no_t0_cavity_bound(instance: OnlineInstance, spec: HybridSpec) -> Optional[Finding]:
    """With no cavity in the top-level T_0, the cycle length is bounded by the edge potentials of
    T_H inside and outside T_0 taken separately."""
    _, _, cav = run_hybrid(instance, spec)
    if not cav.valid:
        return None
    tree = instance.geometry
    top = decompose(tree)
    if any((top.t0_mask >> v) & 1 for v in cav.cavities()):
        return None
    vertices, rho, _ = _cavity_tree(tree, cav.cavities())
    inside, outside = [], []
    for v in vertices:
        if v == rho:
            continue
        both_in_t0 = (top.t0_mask >> v) & 1 and (top.t0_mask >> tree.parent[v]) & 1
        (inside if both_in_t0 else outside).append(tree.weight[v])
    rhs = (
        2 * _edge_potential(outside)
        + 2 * _edge_potential(inside)
        - 2 * tree.path_distance(tree.lca(cav.h[0], cav.a_d), rho)
    )
    return Finding.compare(
        "no-t0-cavity-bound", hybrid_cycle_length(cav, tree.path_distance), rhs, _describe(spec)
    )


def check_tstrong_ring_bound(instance: OnlineInstance, spec: HybridSpec) -> Optional[Finding]:
    """Cycle length <= 2(n-1) d^max(r_{t_d}, a_d)."""
    _, _, cav = run_hybrid(instance, spec)
    if not cav.valid:
        return None
    tree = instance.geometry
    r = instance.requests[spec.t_d - 1]
    bound = 2 * (tree.n - 1) * tree.max_weight_distance(r, spec.a_d)
    return Finding.compare(
        "tstrong-ring", hybrid_cycle_length(cav, tree.path_distance), bound, _describe(spec)
    )


def check_bstar_ring_bound(
    instance: OnlineInstance, spec: HybridSpec, bstar: BStar
) -> List[Finding]:
    """Cycle length in the metric <= scale * cycle length in the rounded site tree
    <= (4k-4) d(r_{t_d}, a_d)."""
    _, _, cav = run_hybrid(instance, spec)
    if not cav.valid:
        return []
    tree = bstar.tree

    def tree_cost(u, v):
        return tree.path_distance(bstar.index_of(u), bstar.index_of(v))

    metric_ring = hybrid_cycle_length(cav, instance.geometry.distance)
    tree_ring = bstar.scale * hybrid_cycle_length(cav, tree_cost)
    r = instance.requests[spec.t_d - 1]
    bound = (4 * instance.k - 4) * instance.geometry.distance(r, spec.a_d)
    return [
        Finding.compare("bstar-ring-metric", metric_ring, tree_ring, _describe(spec)),
        Finding.compare("bstar-ring-tree", tree_ring, bound, _describe(spec)),
    ]


def check_priority_distance(tree: WeightedTree, alg: MpfsAlgorithm) -> Finding:
    """Whenever alg ranks s above s2 for r: d^max(s, s2) <= d^max(r, s2) <= d(r, s2)."""
    for r in tree.points():
        order = alg.preference_list(r)
        for i, s in enumerate(order):
            for s2 in order[i + 1 :]:
                if not (
                    tree.max_weight_distance(s, s2)
                    <= tree.max_weight_distance(r, s2)
                    <= tree.path_distance(r, s2)
                ):
                    return Finding.holds(
                        "priority-distance",
                        False,
                        "r={} ranks {} above {} in {}".format(r, s, s2, list(order)),
                    )
    return Finding.holds("priority-distance", True)


def check_full_servers_behind(tree: WeightedTree, trace: AssignmentTrace) -> Finding:
    """When SD serves r from s with lca(r, s) strictly above r, every s2 whose lca with r lies
    strictly below lca(r, s) was already full."""
    for step in trace.steps:
        r, s = step.request, step.site
        top = tree.lca(r, s)
        if top == r:
            continue
        for s2 in trace.free_before(step.t):
            below = tree.lca(r, s2)
            if below != top and tree.is_ancestor(top, below):
                return Finding.holds(
                    "full-servers-behind",
                    False,
                    "t={} r={} went to {} while {} was free".format(step.t, r, s, s2),
                )
    return Finding.holds("full-servers-behind", True)


def _part_vertices(node, i):
    return {v for v in node.vertices if (node.part_mask(i) >> v) & 1}


def _confinement_findings(top, cav):
    cavities = cav.cavities()
    h, a_d = cav.h[0], cav.a_d
    findings = []
    part = top.part_of(h)
    if part == top.part_of(a_d):
        inside = _part_vertices(top, part)
        findings.append(
            Finding.holds(
                "confinement-part",
                cavities <= inside,
                "h={} a_d={} share T_{} but cavities are {}".format(h, a_d, part, sorted(cavities)),
            )
        )
    if not any((top.t0_mask >> v) & 1 for v in cavities):
        side = top.side_of(h)
        if side == top.side_of(a_d):
            inside = {v for v in top.vertices if (top.side_mask(side) >> v) & 1}
            findings.append(
                Finding.holds(
                    "confinement-side",
                    cavities <= inside,
                    "h={} a_d={} share side {} but cavities are {}".format(
                        h, a_d, side, sorted(cavities)
                    ),
                )
            )
    return findings


def _simulation_subtrees(top, cavities):
    """(label, vertex set, root, stand-in) for every subtree a hybrid run reduces to.

    A request from outside the subtree is replaced by its stand-in vertex. The stand-in is None
    for T_0, where a request from T_i is replaced by par(rho_i).
    """

    def holds_cavity(mask):
        return any((mask >> v) & 1 for v in cavities)

    subtrees = []
    for i in range(1, len(top.heavy_roots) + 1):
        if not holds_cavity(top.part_mask(i)):
            rest = top.mask & ~top.part_mask(i)
            vertices = {v for v in top.vertices if (rest >> v) & 1}
            subtrees.append(("T_-{}".format(i), vertices, top.root, top.heavy_parent(i)))
    for i in range(len(top.heavy_roots) + 1):
        inside = _part_vertices(top, i)
        if cavities <= inside:
            if i == 0:
                subtrees.append(("T_0", inside, top.root, None))
            else:
                root = top.heavy_roots[i - 1]
                subtrees.append(("T_{}".format(i), inside, root, root))
    if not holds_cavity(top.t0_mask):
        for j in (1, 2):
            inside = {v for v in top.vertices if (top.side_mask(j) >> v) & 1}
            if cavities <= inside:
                root = top.side_root(j)
                subtrees.append(("T^({})".format(j), inside, root, root))
    return subtrees


def simulate_on_subtree(
    top: Decomposition,
    instance: OnlineInstance,
    spec: HybridSpec,
    vertices: Set[int],
    root: int,
    stand_in: Optional[int] = None,
) -> Tuple[Optional[Tuple[CavityTrace, Fraction]], str]:
    """Replays a well-behaved SD hybrid on the subtree spanned by vertices.

    The filling prefix shrinks to the subtree's non-cavity vertices and every later request
    outside the subtree is replaced by stand_in (par(rho_i) of its own T_i when stand_in is None).
    Each replaced step has to reproduce the original A and H assignments. Returns the cavity trace
    (in original labels) and cycle length of the rebuilt hybrid, or None and the first step that
    did not reproduce.
    """
    tree = instance.geometry
    subtree, labels = tree.restricted_to(vertices, root)
    sd_sub = SubtreeDecomposition(decompose(subtree), labels=labels)
    trace_A, trace_H, cav = run_hybrid(instance, spec)
    cavities = cav.cavities()
    requests = sorted(set(vertices) - cavities)
    for t in range(cav.t_d, instance.k + 1):
        r = instance.requests[t - 1]
        if r in vertices:
            u = r
        elif stand_in is not None:
            u = stand_in
        else:
            u = top.heavy_parent(top.part_of(r))
        free_A, free_H = trace_A.free_before(t), trace_H.free_before(t)
        if not free_A <= vertices or not free_H <= vertices:
            return None, "free sites outside the subtree at t={}".format(t)
        s_A = sd_sub.select(u, free_A)
        if s_A != trace_A.site_at(t):
            return None, "t={}: request {} as {} goes to {} under A instead of {}".format(
                t, r, u, s_A, trace_A.site_at(t)
            )
        if t != cav.t_d:
            s_H = sd_sub.select(u, free_H)
            if s_H != trace_H.site_at(t):
                return None, "t={}: request {} as {} goes to {} under H instead of {}".format(
                    t, r, u, s_H, trace_H.site_at(t)
                )
        requests.append(u)

    index = {v: i for i, v in enumerate(labels)}
    sub_instance = OnlineInstance(
        subtree,
        range(subtree.n),
        [1] * subtree.n,
        [index[u] for u in requests],
        kind="OMT_S2",
    )
    sub_spec = HybridSpec(
        SubtreeDecomposition(decompose(subtree)),
        len(vertices) - len(cavities) + 1,
        index[cav.a_d],
    )
    _, _, sub_cav = run_hybrid(sub_instance, sub_spec)
    if not sub_cav.valid:
        return None, "the rebuilt hybrid is not valid"
    ring = hybrid_cycle_length(sub_cav, subtree.path_distance)
    relabeled = CavityTrace(
        True,
        sub_cav.t_d,
        labels[sub_cav.a_d],
        sub_cav.t_c,
        [labels[v] for v in sub_cav.h],
        [labels[v] for v in sub_cav.a],
        (),
        (),
    )
    return (relabeled, ring), ""


def check_simulation_confinement(instance: OnlineInstance, spec: HybridSpec) -> List[Finding]:
    """Findings for SD hybrids: where the first two cavities share a part or a side, every
    cavity stays there; and each subtree that holds all cavities (or misses a whole T_i) carries
    a smaller hybrid run with the same cavities and the same cycle length."""
    _, _, cav = run_hybrid(instance, spec)
    if not cav.valid:
        return []
    tree = instance.geometry
    top = decompose(tree)
    if top.is_leaf:
        return []
    findings = _confinement_findings(top, cav)

    try:
        behaved, behaved_spec = make_well_behaved(instance, spec)
    except CavityInvariantException as e:
        return findings + [Finding.holds("simulation", False, str(e))]
    _, _, w_cav = run_hybrid(behaved, behaved_spec)
    ring = hybrid_cycle_length(w_cav, tree.path_distance)
    for label, vertices, root, stand_in in _simulation_subtrees(top, w_cav.cavities()):
        result, reason = simulate_on_subtree(top, behaved, behaved_spec, vertices, root, stand_in)
        if result is None:
            findings.append(Finding.holds("simulation", False, "{}: {}".format(label, reason)))
            continue
        sub_cav, sub_ring = result
        ok = (
            sub_cav.cavities() == w_cav.cavities()
            and sub_cav.h[0] == w_cav.h[0]
            and sub_ring == ring
        )
        findings.append(
            Finding.holds(
                "simulation",
                ok,
                "{}: cavities {} ring {} vs {} ring {}".format(
                    label, sorted(sub_cav.cavities()), sub_ring, sorted(w_cav.cavities()), ring
                ),
            )
        )
    return findings


def _bstar_of(alg):
    if isinstance(alg, NearestSiteLift):
        alg = alg.inner
    return alg if isinstance(alg, BStar) else None


def run_hybrid_lemma_suite(instance: OnlineInstance, spec: HybridSpec) -> List[Finding]:
    """Every applicable hybrid check for one (instance, spec) pair."""
    try:
        trace_A, trace_H, cav = run_hybrid(instance, spec)
    except CavityInvariantException as e:
        return [Finding.holds("cavity-uniqueness", False, "{}: {}".format(_describe(spec), e))]
    findings = [Finding.holds("cavity-uniqueness", True)]
    if not cav.valid:
        return findings
    cost = instance.geometry.distance
    traces = (trace_A, trace_H)
    findings.append(check_step_properties(traces, cav))
    findings.append(check_cycle_cost_bound(traces, cav, cost))
    findings.append(check_conjugate(instance, spec))
    findings.append(check_partial_cycle(instance, spec, cost))
    conjugate, conjugate_spec = conjugate_of(instance, spec)
    findings.append(check_partial_cycle(conjugate, conjugate_spec, cost))

    try:
        behaved, behaved_spec = make_well_behaved(instance, spec)
        _, _, w_cav = run_hybrid(behaved, behaved_spec)
        findings.append(
            Finding.holds(
                "well-behaved",
                is_well_behaved(behaved, behaved_spec)
                and w_cav.cavities() == cav.cavities()
                and w_cav.h[0] == cav.h[0]
                and hybrid_cycle_length(w_cav, cost) == hybrid_cycle_length(cav, cost),
                "{} became {}".format(cav, w_cav),
            )
        )
    except CavityInvariantException as e:
        findings.append(Finding.holds("well-behaved", False, str(e)))

    if _is_identity_sd(spec.base, instance):
        findings.extend(check_main_bound(instance, spec))
        findings.append(check_no_t0_cavity_bound(instance, spec))
        findings.append(check_tstrong_ring_bound(instance, spec))
        findings.extend(check_simulation_confinement(instance, spec))
        findings.append(check_full_servers_behind(instance.geometry, trace_A))
    bstar = _bstar_of(spec.base)
    if bstar is not None and instance.requests_on_sites():
        findings.extend(check_bstar_ring_bound(instance, spec, bstar))
    detail = "{} {}".format(_describe(spec), list(instance.requests))
    return [
        f._replace(detail="{}; {}".format(detail, f.detail) if f.detail else detail)
        for f in findings
        if f is not None
    ]
