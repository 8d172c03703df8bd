"""Acceptance sweeps, the empirical ratio table and the SD timing benchmark.

Each verify-bounds family expands into a list of independent cases. A case is evaluated by a
module-level function (so that it can be shipped to a worker process) into a CaseResult, and the
results are folded into a SweepReport in case order, whatever the worker count.
"""

import collections
import concurrent.futures
import itertools
import logging
import random
import statistics
import time
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

import toolz

from .algorithms import (
    Greedy,
    SubtreeDecomposition,
    build_bstar,
    lift_nearest_site,
    make_algorithm,
)
from .decomposition import decompose
from .hybrid import (
    HybridSpec,
    check_full_servers_behind,
    check_priority_distance,
    run_hybrid_lemma_suite,
)
from .instance import (
    RNG_NAME,
    GeneratorConfig,
    OnlineInstance,
    enumerate_sequences,
    enumerate_small_trees,
    generate,
)
from .metric import (
    WeightedTree,
    format_exact,
    four_point_sides,
    mst_of_metric,
    round_to_power_of_two,
    tree_metric,
)
from .online import run_online
from .oracle import (
    CostModel,
    SearchGuardException,
    ZeroOptimumException,
    brute_force_cost,
    check_capacity_collapse,
    opt_cost,
    worst_case_ratio,
)
from .report import Finding, RatioRow, SweepReport

log = logging.getLogger(__name__)

FAMILIES = (
    "sd-tstrong",
    "bstar-omms",
    "pipeline-otr",
    "hybrid-lemmas",
    "structural",
    "mpfs",
    "capacity-collapse",
)
TREE_FAMILIES = ("sd-tstrong", "hybrid-lemmas", "mpfs")

MAX_TREE_SIZE = 5
BSTAR_HYBRID_SEQUENCES = 8
MAX_SEQUENCE_LENGTH = 6
CROSS_CHECK_MAX_K = 4

DEFAULTS = {
    "sd-tstrong": {"max_n": 4, "max_k": 4, "samples": 0},
    "bstar-omms": {"max_n": 4, "max_k": 4, "samples": 200},
    "pipeline-otr": {"max_n": 5, "max_k": 5, "samples": 100},
    "hybrid-lemmas": {"max_n": 3, "max_k": 6, "samples": 10 ** 4},
    "structural": {"max_n": 8, "max_k": 0, "samples": 10 ** 3},
    "mpfs": {"max_n": 4, "max_k": 0, "samples": 0},
    "capacity-collapse": {"max_n": 4, "max_k": 5, "samples": 30},
}

CaseResult = collections.namedtuple("CaseResult", ["rows", "findings", "witnesses"])


class SweepOptions(object):
    """Size limits of one verify-bounds family; unset limits take the family defaults."""

    def __init__(
        self,
        family: str,
        max_n: Optional[int] = None,
        max_k: Optional[int] = None,
        seed: int = 0,
        workers: int = 1,
        samples: Optional[int] = None,
        unsafe: bool = False,
    ) -> None:
        if family not in FAMILIES:
            raise SearchGuardException(
                "Unknown family {!r}, expected one of: {}".format(family, ", ".join(FAMILIES))
            )
        defaults = DEFAULTS[family]
        self.family = family
        self.max_n = defaults["max_n"] if max_n is None else max_n
        self.max_k = defaults["max_k"] if max_k is None else max_k
        self.seed = seed
        self.workers = max(1, workers)
        self.samples = defaults["samples"] if samples is None else samples
        self.unsafe = unsafe
        self.validate()

    def validate(self) -> None:
        if self.samples < 0:
            raise SearchGuardException("--samples must be >= 0, got {}".format(self.samples))
        if self.unsafe:
            return
        if self.family in TREE_FAMILIES and self.max_n > MAX_TREE_SIZE:
            raise SearchGuardException(
                "Exhaustive tree families are capped at n <= {}, got {}; pass --unsafe-large to "
                "go further".format(MAX_TREE_SIZE, self.max_n)
            )
        if self.max_k > MAX_SEQUENCE_LENGTH:
            raise SearchGuardException(
                "Exhaustive sequences are capped at k <= {}, got {}; pass --unsafe-large to go "
                "further".format(MAX_SEQUENCE_LENGTH, self.max_k)
            )

    def to_json(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "max_n": self.max_n,
            "max_k": self.max_k,
            "seed": self.seed,
            "samples": self.samples,
            "unsafe": self.unsafe,
        }


def run_cases(
    fn: Callable[[Any], CaseResult], cases: Iterable, workers: int = 1
) -> List[CaseResult]:
    """fn over cases, in case order, on up to workers processes."""
    cases = list(cases)
    if workers <= 1 or len(cases) < 2:
        return [fn(case) for case in cases]
    chunksize = max(1, len(cases) // (4 * workers))
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cases, chunksize=chunksize))


def _case_seeds(seed, count):
    rng = random.Random(seed)
    return [rng.getrandbits(63) for _ in range(count)]


def _oracle_cross_check(instance, opt, cost=None):
    """Compares the flow optimum with brute force on a deterministic tenth of small instances."""
    if instance.k > CROSS_CHECK_MAX_K or int(instance.digest(), 16) % 10:
        return None
    return Finding.equal(
        "oracle-cross-check",
        opt,
        brute_force_cost(instance, cost),
        "{} {}".format(instance.digest()[:12], list(instance.requests)),
    )


def _tree_label(tree):
    return [(v, p, format_exact(w)) for v, p, w in tree.edges()]


class _Worst(object):
    """Tracks the first sequence reaching the largest ratio."""

    def __init__(self):
        self.ratio = None
        self.instance = None
        self.alg_cost = None
        self.opt = None
        self.opt_max = None

    def offer(self, ratio, instance, alg_cost, opt, opt_max=None):
        if self.ratio is None or ratio > self.ratio:
            self.ratio = ratio
            self.instance = instance
            self.alg_cost = alg_cost
            self.opt = opt
            self.opt_max = opt_max


def _ratio(alg_cost, opt, instance, algorithm):
    if opt == 0:
        if alg_cost != 0:
            raise ZeroOptimumException(
                "{} pays {} on {} where the optimum is free".format(algorithm, alg_cost, instance),
                instance.requests,
            )
        return Fraction(0)
    return Fraction(alg_cost) / opt


def _sd_tstrong_case(tree):
    n = tree.n
    sites = list(range(n))
    alg = SubtreeDecomposition(decompose(tree))
    max_cost = CostModel(CostModel.TREE_MAX_WEIGHT, tree)
    base = OnlineInstance(tree, sites, [1] * n, sites, kind="OMT_S2")
    worst = _Worst()
    findings = []
    sandwich_problem, behind_problem = "", ""
    for sequence in enumerate_sequences(sites, n):
        instance = base.with_requests(sequence)
        trace = run_online(instance, alg)
        opt = opt_cost(instance)
        opt_max = opt_cost(instance, max_cost)
        if opt_max > opt and not sandwich_problem:
            sandwich_problem = "{}: {} > {}".format(list(sequence), opt_max, opt)
        behind = check_full_servers_behind(tree, trace)
        if not behind.passed and not behind_problem:
            behind_problem = "{}: {}".format(list(sequence), behind.detail)
        worst.offer(
            _ratio(trace.total_cost, opt_max, instance, alg.name),
            instance,
            trace.total_cost,
            opt,
            opt_max,
        )
        cross = _oracle_cross_check(instance, opt)
        if cross is not None:
            findings.append(cross)
    findings.append(Finding.holds("opt-max-below-opt", not sandwich_problem, sandwich_problem))
    findings.append(Finding.holds("full-servers-behind", not behind_problem, behind_problem))
    row = RatioRow(
        worst.instance.digest(),
        alg.name,
        n,
        n,
        worst.alg_cost,
        worst.opt,
        worst.opt_max,
        Fraction(3 * n - 3),
        "tree {} witness {}".format(_tree_label(tree), list(worst.instance.requests)),
    )
    witnesses = [] if row.passed and all(f.passed for f in findings) else [base.to_json()]
    return CaseResult([row], findings, witnesses)


def _scan(instance, alg, positions, bound):
    """Worst ratio of alg over every sequence on positions, as a row plus cross-checks."""
    worst = _Worst()
    findings = []
    for sequence in enumerate_sequences(positions, instance.k):
        candidate = instance.with_requests(sequence)
        alg_cost = run_online(candidate, alg).total_cost
        opt = opt_cost(candidate)
        worst.offer(_ratio(alg_cost, opt, candidate, alg.name), candidate, alg_cost, opt)
        cross = _oracle_cross_check(candidate, opt)
        if cross is not None:
            findings.append(cross)
    row = RatioRow(
        worst.instance.digest(),
        alg.name,
        instance.k,
        instance.m,
        worst.alg_cost,
        worst.opt,
        None,
        Fraction(bound),
        "seed {} witness {}".format(instance.seed, list(worst.instance.requests)),
    )
    return row, findings, worst.instance


def _bstar_omms_case(case):
    seed, k = case
    instance = generate(
        GeneratorConfig(seed=seed, shape="random-metric", n=k, m=k, k=k, kind="OMM_S")
    )
    alg = make_algorithm("bstar", instance)
    row, findings, witness = _scan(instance, alg, instance.sites, 4 * k - 3)
    witnesses = [] if row.passed else [witness.to_json()]
    for candidate in _bstar_hybrid_sample(instance, witness, seed):
        for t_d in range(1, k + 1):
            for a_d in instance.sites:
                found = run_hybrid_lemma_suite(candidate, HybridSpec(alg, t_d, a_d))
                if len(found) > 1 or not found[0].passed:
                    findings.extend(found)
                if not all(f.passed for f in found):
                    witnesses.append(candidate.to_json())
    if not all(f.passed for f in findings) and not witnesses:
        witnesses.append(witness.to_json())
    return CaseResult([row], findings, list(toolz.unique(witnesses, key=repr)))


def _bstar_hybrid_sample(
    instance: OnlineInstance, witness: OnlineInstance, seed: int
) -> List[OnlineInstance]:
    """The worst-ratio witness plus a seeded sample of the other request sequences."""
    others = [
        sequence
        for sequence in enumerate_sequences(instance.sites, instance.k)
        if tuple(sequence) != tuple(witness.requests)
    ]
    count = min(BSTAR_HYBRID_SEQUENCES - 1, len(others))
    sample = random.Random(seed).sample(others, count)
    return [witness] + [instance.with_requests(sequence) for sequence in sample]


def _pipeline_otr_case(case):
    seed, m, k = case
    instance = generate(
        GeneratorConfig(
            seed=seed,
            shape="random-metric",
            n=m + 2,
            m=m,
            k=k,
            capacity_scheme="random",
            kind="OTR",
            request_positions="off-site",
        )
    )
    alg = make_algorithm("bstar", instance)
    positions = sorted(set(range(instance.n)) - set(instance.sites))
    row, findings, witness = _scan(instance, alg, positions, 8 * m - 5)
    failed = not row.passed or not all(f.passed for f in findings)
    return CaseResult([row], findings, [witness.to_json()] if failed else [])


def _hybrid_findings(instance, alg, t_d, a_d):
    findings = run_hybrid_lemma_suite(instance, HybridSpec(alg, t_d, a_d))
    digest = instance.digest()[:12]
    findings = [f._replace(detail="{} {}".format(digest, f.detail)) for f in findings]
    failed = not all(f.passed for f in findings)
    return findings, [instance.to_json()] if failed else []


def _hybrid_tree_case(tree):
    n = tree.n
    sites = list(range(n))
    alg = SubtreeDecomposition(decompose(tree))
    base = OnlineInstance(tree, sites, [1] * n, sites, kind="OMT_S2")
    findings, witnesses = [], []
    for sequence in enumerate_sequences(sites, n):
        instance = base.with_requests(sequence)
        for t_d in range(1, n + 1):
            for a_d in sites:
                found, failed = _hybrid_findings(instance, alg, t_d, a_d)
                # invalid specs only contribute their cavity-uniqueness finding when it fails
                if len(found) > 1 or not found[0].passed:
                    findings.extend(found)
                witnesses.extend(failed)
    return CaseResult([], findings, witnesses)


def _hybrid_sample_case(seed):
    rng = random.Random(seed)
    n = rng.randint(4, 6)
    instance = generate(GeneratorConfig(seed=seed, shape="random-tree", n=n, lo=0, hi=2))
    alg = SubtreeDecomposition(decompose(instance.geometry))
    t_d = rng.randint(1, n - 1)
    trace = run_online(instance, alg)
    choices = sorted(trace.free_before(t_d) - {trace.site_at(t_d)})
    found, failed = _hybrid_findings(instance, alg, t_d, rng.choice(choices))
    return CaseResult([], found, failed)


def _structural_case(seed):
    rng = random.Random(seed)
    findings = []

    tree = generate(
        GeneratorConfig(seed=seed, shape="random-tree", n=rng.randint(2, 8), lo=0, hi=3)
    ).geometry
    u, v = rng.randrange(tree.n), rng.randrange(tree.n)
    d_max, d_path = tree.max_weight_distance(u, v), tree.path_distance(u, v)
    findings.append(
        Finding.holds(
            "tree-sandwich",
            d_max <= d_path <= (tree.n - 1) * d_max,
            "u={} v={} max={} path={}".format(u, v, d_max, d_path),
        )
    )

    vs = [rng.randrange(tree.n) for _ in range(4)]
    top = vs[0]
    for w in vs[1:]:
        top = tree.lca(top, w)
    rho = top
    while rho != tree.root and rng.random() < 0.5:
        rho = tree.parent[rho]
    lhs, rhs = four_point_sides(tree, rho, *vs)
    findings.append(Finding.equal("four-point", lhs, rhs, "rho={} v={}".format(rho, vs)))

    space = generate(
        GeneratorConfig(seed=seed, shape="random-metric", n=rng.randint(2, 6), lo=0, hi=3)
    ).geometry
    mst = mst_of_metric(space)
    scale = space.min_distance()
    rounded = round_to_power_of_two(mst_of_metric(space.scaled(1 / scale)))
    mst_problem, rounded_problem = "", ""
    for a, b in itertools.combinations(range(space.n), 2):
        d = space.distance(a, b)
        if not mst.max_weight_distance(a, b) <= d <= mst.path_distance(a, b):
            mst_problem = mst_problem or "pair ({}, {})".format(a, b)
        if not rounded.max_weight_distance(a, b) < 2 * (d / scale):
            rounded_problem = rounded_problem or "pair ({}, {})".format(a, b)
    findings.append(Finding.holds("mst-sandwich", not mst_problem, mst_problem))
    findings.append(Finding.holds("rounded-max-weight", not rounded_problem, rounded_problem))
    return CaseResult([], findings, [])


def _free_sets(n):
    for mask in range(1, 1 << n):
        yield mask, frozenset(v for v in range(n) if (mask >> v) & 1)


def _check_mpfs(tree, alg):
    n = tree.n
    subsets = dict(_free_sets(n))
    monotone_problem, agreement_problem = "", ""
    for r in range(n):
        order = alg.preference_list(r)
        for mask, free in subsets.items():
            s = alg.select(r, free)
            if s != next(v for v in order if v in free) and not agreement_problem:
                agreement_problem = "r={} free={} chose {}".format(r, sorted(free), s)
            sub = mask
            while sub:
                if (sub >> s) & 1 and alg.select(r, subsets[sub]) != s and not monotone_problem:
                    monotone_problem = "r={} free={} sub={}".format(
                        r, sorted(free), sorted(subsets[sub])
                    )
                sub = (sub - 1) & mask
    return [
        Finding.holds("monotonicity-" + alg.name, not monotone_problem, monotone_problem),
        Finding.holds("preference-agreement-" + alg.name, not agreement_problem, agreement_problem),
    ]


def _mpfs_case(tree):
    sites = list(tree.points())
    sd = SubtreeDecomposition(decompose(tree))
    algorithms = [
        sd,
        Greedy(tree, sites),
        lift_nearest_site(build_bstar(tree_metric(tree), sites), tree, sites),
    ]
    findings = []
    for alg in algorithms:
        findings.extend(_check_mpfs(tree, alg))
    findings.append(check_priority_distance(tree, sd))
    label = "tree {}".format(_tree_label(tree))
    findings = [f._replace(detail="{} {}".format(label, f.detail)) for f in findings]
    return CaseResult([], findings, [])


def _capacity_collapse_case(case):
    seed, m, k = case
    instance = generate(
        GeneratorConfig(
            seed=seed,
            shape="random-metric",
            n=m + 1,
            m=m,
            k=k,
            capacity_scheme="random",
            kind="OTR",
            request_positions="all",
        )
    )
    cost = instance.geometry.distance
    findings = []
    for name in ("greedy", "bstar"):
        alg = make_algorithm(name, instance)
        finding = check_capacity_collapse(
            instance.geometry,
            instance.sites,
            instance.capacities,
            alg,
            list(range(instance.n)),
            cost,
            cost,
        )
        findings.append(finding._replace(detail="{} seed {} {}".format(name, seed, finding.detail)))
    failed = not all(f.passed for f in findings)
    return CaseResult([], findings, [instance.to_json()] if failed else [])


def _family_cases(options):
    family = options.family
    if family == "sd-tstrong":
        trees = (
            enumerate_small_trees(n, (0, 1, 2))
            for n in range(2, min(options.max_n, options.max_k) + 1)
        )
        return _sd_tstrong_case, list(itertools.chain.from_iterable(trees))
    if family == "bstar-omms":
        sizes = [k for k in (2, 3, 4) if k <= options.max_k]
        seeds = _case_seeds(options.seed, options.samples)
        return _bstar_omms_case, [(s, sizes[i % len(sizes)]) for i, s in enumerate(seeds)]
    if family == "pipeline-otr":
        shapes = [(m, k) for m in (2, 3) for k in (3, 4, 5) if k <= options.max_k]
        seeds = _case_seeds(options.seed, options.samples)
        return _pipeline_otr_case, [
            (s,) + shapes[i % len(shapes)] for i, s in enumerate(seeds)
        ]
    if family == "hybrid-lemmas":
        trees = [
            tree
            for n in range(2, options.max_n + 1)
            for tree in enumerate_small_trees(n, (0, 1))
        ]
        cases = [("tree", tree) for tree in trees]
        cases += [("sample", s) for s in _case_seeds(options.seed, options.samples)]
        return _hybrid_case, cases
    if family == "structural":
        return _structural_case, _case_seeds(options.seed, options.samples)
    if family == "mpfs":
        trees = (enumerate_small_trees(n, (0, 1, 2)) for n in range(2, options.max_n + 1))
        return _mpfs_case, list(itertools.chain.from_iterable(trees))
    shapes = [(m, k) for m in (2, 3) for k in range(m + 1, 6) if k <= options.max_k]
    seeds = _case_seeds(options.seed, options.samples)
    return _capacity_collapse_case, [(s,) + shapes[i % len(shapes)] for i, s in enumerate(seeds)]


def _hybrid_case(case):
    kind, payload = case
    if kind == "tree":
        return _hybrid_tree_case(payload)
    return _hybrid_sample_case(payload)


def verify_bounds(options: SweepOptions, timestamp: Optional[str] = None) -> SweepReport:
    """Runs one family and returns its SweepReport."""
    fn, cases = _family_cases(options)
    log.info(
        "Running %s: %d cases on %d worker(s), seed %d",
        options.family,
        len(cases),
        options.workers,
        options.seed,
    )
    report = SweepReport(options.family, options.to_json(), options.seed, RNG_NAME, timestamp)
    for chunk in toolz.partition_all(1000, cases):
        for result in run_cases(fn, chunk, options.workers):
            for row in result.rows:
                report.add_row(row)
            report.add_findings(result.findings)
            report.add_witnesses(result.witnesses)
    log.info(
        "%s: %d rows, %d findings, %s",
        options.family,
        len(report.rows),
        len(report.findings),
        "passed" if report.passed else "FAILED",
    )
    return report


RATIO_TABLE_FAMILIES = ("doubling-path", "random-tree", "random-metric")
RATIO_TABLE_COLUMNS = (
    "family",
    "algorithm",
    "m",
    "instances",
    "worst_ratio",
    "worst_ratio_float",
    "mean_ratio",
    "mean_ratio_float",
    "bound",
)


def _ratio_table_instances(family, m, seed, samples):
    if family == "doubling-path":
        tree = WeightedTree.from_edges(m, [(i, i + 1, 1 << i) for i in range(m - 1)])
        sites = list(range(m))
        return [OnlineInstance(tree, sites, [1] * m, sites, kind="OMT_S2")]
    shape = "random-tree" if family == "random-tree" else "random-metric"
    return [
        generate(GeneratorConfig(seed=s, shape=shape, n=m, lo=0, hi=2))
        for s in _case_seeds(seed + m, samples)
    ]


def ratio_table(
    algorithms: Sequence[str],
    families: Sequence[str],
    max_m: int,
    seed: int = 0,
    samples: int = 5,
    workers: int = 1,
    unsafe: bool = False,
) -> List[Dict[str, Any]]:
    """Worst and mean exhaustive ratios per (family, algorithm, m), m = 2..max_m."""
    if max_m > MAX_SEQUENCE_LENGTH and not unsafe:
        raise SearchGuardException(
            "Ratio tables are capped at m <= {}, got {}".format(MAX_SEQUENCE_LENGTH, max_m)
        )
    rows = []
    for family in families:
        if family not in RATIO_TABLE_FAMILIES:
            raise SearchGuardException(
                "Unknown ratio-table family {!r}, expected one of: {}".format(
                    family, ", ".join(RATIO_TABLE_FAMILIES)
                )
            )
        for m in range(2, max_m + 1):
            instances = _ratio_table_instances(family, m, seed, samples)
            for name in algorithms:
                if name == "sd" and not instances[0].is_tree:
                    log.info("Skipping sd on %s: it needs a tree", family)
                    continue
                ratios = []
                for instance in instances:
                    alg = make_algorithm(name, instance)
                    ratio, _ = worst_case_ratio(
                        instance.geometry,
                        instance.sites,
                        instance.capacities,
                        alg,
                        instance.geometry.distance,
                        instance.geometry.distance,
                        workers=workers,
                        unsafe=unsafe,
                    )
                    ratios.append(ratio)
                worst = max(ratios)
                mean = sum(ratios, Fraction(0)) / len(ratios)
                rows.append(
                    {
                        "family": family,
                        "algorithm": name,
                        "m": m,
                        "instances": len(ratios),
                        "worst_ratio": format_exact(worst),
                        "worst_ratio_float": "{:.6f}".format(float(worst)),
                        "mean_ratio": format_exact(mean),
                        "mean_ratio_float": "{:.6f}".format(float(mean)),
                        "bound": str(8 * m - 5) if name in ("sd", "bstar") else "",
                    }
                )
    return rows


BENCH_COLUMNS = (
    "n",
    "requests",
    "median_per_request",
    "min_per_request",
    "max_per_request",
    "stdev_per_request",
    "growth",
)


def uniform_path(n: int) -> WeightedTree:
    return WeightedTree.from_edges(n, [(i, i + 1, 1) for i in range(n - 1)])


def _time_prefix(alg: SubtreeDecomposition, n: int, requests: int) -> float:
    free = set(range(n))
    start = time.perf_counter()
    for _ in range(requests):
        free.discard(alg.select(n - 1, free))
    return time.perf_counter() - start


def _time_run(instance: OnlineInstance, alg: SubtreeDecomposition) -> float:
    start = time.perf_counter()
    run_online(instance, alg)
    return time.perf_counter() - start


def bench(
    n_list: Sequence[int], repeats: int = 5, requests: Optional[int] = None
) -> List[Dict[str, Any]]:
    """Per-request SD time on a uniform path with every request at the far end.

    Each run serves n requests through run_online; with requests set, only that many raw
    selections are timed instead.
    """
    rows = []
    previous = None
    for n in n_list:
        tree = uniform_path(n)
        alg = SubtreeDecomposition(decompose(tree))
        if requests is None:
            count = n
            instance = OnlineInstance(tree, range(n), [1] * n, [n - 1] * n, kind="OMT_S2")

            def timed() -> float:
                return _time_run(instance, alg)

        else:
            count = min(requests, n)

            def timed() -> float:
                return _time_prefix(alg, n, count)

        timed()
        samples = [timed() / count for _ in range(repeats)]
        median = statistics.median(samples)
        rows.append(
            {
                "n": n,
                "requests": count,
                "median_per_request": "{:.9f}".format(median),
                "min_per_request": "{:.9f}".format(min(samples)),
                "max_per_request": "{:.9f}".format(max(samples)),
                "stdev_per_request": "{:.9f}".format(
                    statistics.stdev(samples) if len(samples) > 1 else 0.0
                ),
                "growth": "" if not previous else "{:.3f}".format(median / previous),
            }
        )
        log.info("n=%d: %.6fs per request over %d requests", n, median, count)
        previous = median
    return rows
