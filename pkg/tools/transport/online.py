"""The online assignment loop shared by every algorithm, and the records it produces."""

import collections
import logging
from fractions import Fraction
from typing import Callable, FrozenSet, Iterable, Optional, Sequence, Tuple

from .instance import OnlineInstance

log = logging.getLogger(__name__)


class NoFreeSiteException(Exception):
    pass


class AssignmentException(Exception):
    pass


class OnlineAlgorithm(object):
    """Assigns each request irrevocably to a free site, possibly looking at earlier requests."""

    name = None

    # True when a request arriving on a free site is always assigned to that site
    colocated_first = False

    def assign(self, history: Sequence[int], request: int, free: FrozenSet[int]) -> int:
        raise NotImplementedError()


class MpfsAlgorithm(OnlineAlgorithm):
    """Most-preferred-free-site algorithm: a fixed, tie-free site priority per request position.

    Subclasses provide preference_list(); select() may be overridden by a faster equivalent.
    """

    colocated_first = True

    def preference_list(self, request: int) -> Tuple[int, ...]:
        raise NotImplementedError()

    def select(self, request: int, free: FrozenSet[int]) -> int:
        if not free:
            raise NoFreeSiteException("No free site left for request {}".format(request))
        for site in self.preference_list(request):
            if site in free:
                return site
        raise NoFreeSiteException(
            "None of the free sites {} are ranked for request {}".format(sorted(free), request)
        )

    def assign(self, history: Sequence[int], request: int, free: FrozenSet[int]) -> int:
        return self.select(request, free)


AssignmentStep = collections.namedtuple("AssignmentStep", ["t", "request", "site", "cost", "free"])


class AssignmentTrace(object):
    """Per-step record of an online run. Times are 1-based; step.free is the free-site set after
    the assignment of that step."""

    def __init__(
        self, algorithm: str, initial_free: Iterable[int], steps: Iterable[AssignmentStep]
    ) -> None:
        self.algorithm = algorithm
        self.initial_free = frozenset(initial_free)
        self.steps = tuple(steps)

    def __len__(self):
        return len(self.steps)

    @property
    def total_cost(self) -> Fraction:
        return sum((step.cost for step in self.steps), Fraction(0))

    @property
    def requests(self) -> Tuple[int, ...]:
        return tuple(step.request for step in self.steps)

    @property
    def sites(self) -> Tuple[int, ...]:
        return tuple(step.site for step in self.steps)

    def site_at(self, t: int) -> int:
        return self.steps[t - 1].site

    def free_after(self, t: int) -> FrozenSet[int]:
        """F_t: the free sites once the first t requests are assigned (F_0 is the initial set)."""
        if t == 0:
            return self.initial_free
        return self.steps[t - 1].free

    def free_before(self, t: int) -> FrozenSet[int]:
        return self.free_after(t - 1)

    def cost_under(self, cost: Callable[[int, int], Fraction]) -> Fraction:
        return sum((cost(step.request, step.site) for step in self.steps), Fraction(0))


def run_online(
    instance: OnlineInstance,
    alg: OnlineAlgorithm,
    cost: Optional[Callable[[int, int], Fraction]] = None,
) -> AssignmentTrace:
    """Feeds the requests of instance to alg in order; a site is free while its load is below
    its capacity. cost defaults to the instance's own distance."""
    cost = cost or instance.geometry.distance
    remaining = dict(zip(instance.sites, instance.capacities))
    free = set(instance.sites)
    initial = frozenset(free)
    requests = instance.requests
    steps = []
    for t, request in enumerate(requests, 1):
        if not free:
            raise NoFreeSiteException(
                "No free site for request {} at time {}: capacities are exhausted".format(
                    request, t
                )
            )
        snapshot = frozenset(free)
        site = alg.assign(requests[: t - 1], request, snapshot)
        if site not in free:
            raise AssignmentException(
                "{} assigned request {} at time {} to site {}, which is not free".format(
                    alg.name, request, t, site
                )
            )
        if alg.colocated_first and request in free and site != request:
            raise AssignmentException(
                "{} sent request {} at time {} to {} although its own site was free".format(
                    alg.name, request, t, site
                )
            )
        remaining[site] -= 1
        if remaining[site] == 0:
            free.discard(site)
            snapshot = frozenset(free)
        steps.append(AssignmentStep(t, request, site, cost(request, site), snapshot))
    log.debug("%s served %d requests", alg.name, len(steps))
    return AssignmentTrace(alg.name, initial, steps)
