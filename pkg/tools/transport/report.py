"""Findings and sweep reports.

A Finding is the outcome of one checked inequality or equality; a violated bound is a failed
finding, never an exception. A SweepReport collects the ratio rows and findings of one
verify-bounds family and writes them as <family>.csv and <family>.json.
"""

import collections
import csv
import json
import logging
import os
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from toolz import groupby, valmap

from .metric import format_exact

log = logging.getLogger(__name__)

Number = Union[int, Fraction]

CSV_COLUMNS = (
    "digest",
    "algorithm",
    "k",
    "m",
    "alg_cost",
    "opt_cost",
    "opt_max_cost",
    "ratio",
    "ratio_float",
    "bound",
    "passed",
    "detail",
)


def _exact_or_none(value: Optional[Fraction]) -> Optional[str]:
    return None if value is None else format_exact(value)


class Finding(collections.namedtuple("Finding", ["name", "lhs", "rhs", "passed", "detail"])):
    __slots__ = ()

    @staticmethod
    def compare(name: str, lhs: Number, rhs: Number, detail: str = "") -> "Finding":
        """lhs <= rhs"""
        return Finding(name, Fraction(lhs), Fraction(rhs), Fraction(lhs) <= Fraction(rhs), detail)

    @staticmethod
    def equal(name: str, lhs: Number, rhs: Number, detail: str = "") -> "Finding":
        return Finding(name, Fraction(lhs), Fraction(rhs), Fraction(lhs) == Fraction(rhs), detail)

    @staticmethod
    def holds(name: str, condition: Any, detail: str = "") -> "Finding":
        return Finding(name, None, None, bool(condition), detail)

    @property
    def slack(self) -> Optional[Fraction]:
        if self.lhs is None or self.rhs is None:
            return None
        return self.rhs - self.lhs

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "lhs": _exact_or_none(self.lhs),
            "rhs": _exact_or_none(self.rhs),
            "slack": _exact_or_none(self.slack),
            "passed": self.passed,
            "detail": self.detail,
        }


class RatioRow(
    collections.namedtuple(
        "RatioRow",
        [
            "digest",
            "algorithm",
            "k",
            "m",
            "alg_cost",
            "opt_cost",
            "opt_max_cost",
            "bound",
            "detail",
        ],
    )
):
    """One evaluated instance. The ratio divides alg_cost by opt_max_cost when that is set (the
    tree-strong families) and by opt_cost otherwise."""

    __slots__ = ()

    @property
    def denominator(self) -> Fraction:
        return self.opt_cost if self.opt_max_cost is None else self.opt_max_cost

    @property
    def ratio(self) -> Fraction:
        if self.denominator == 0:
            return Fraction(0)
        return Fraction(self.alg_cost) / self.denominator

    @property
    def passed(self) -> bool:
        return self.bound is None or self.ratio <= self.bound

    def to_csv(self) -> Dict[str, Any]:
        return {
            "digest": self.digest[:12],
            "algorithm": self.algorithm,
            "k": self.k,
            "m": self.m,
            "alg_cost": format_exact(self.alg_cost),
            "opt_cost": format_exact(self.opt_cost),
            "opt_max_cost": _exact_or_none(self.opt_max_cost) or "",
            "ratio": format_exact(self.ratio),
            "ratio_float": "{:.6f}".format(float(self.ratio)),
            "bound": _exact_or_none(self.bound) or "",
            "passed": "true" if self.passed else "false",
            "detail": self.detail,
        }


def summarize_findings(findings: Iterable[Finding]) -> Dict[str, Dict[str, Any]]:
    """Per finding name: how many were checked, how many failed, and the smallest slack."""

    def summary(group):
        slacks = [f.slack for f in group if f.slack is not None]
        return {
            "checked": len(group),
            "failed": sum(1 for f in group if not f.passed),
            "min_slack": format_exact(min(slacks)) if slacks else None,
        }

    return valmap(summary, groupby(lambda f: f.name, findings))


def summarize_rows(rows: Iterable[RatioRow]) -> Dict[str, Dict[str, Any]]:
    """Per algorithm: number of rows, max ratio and failure count."""

    def summary(group):
        return {
            "rows": len(group),
            "max_ratio": format_exact(max(r.ratio for r in group)),
            "failed": sum(1 for r in group if not r.passed),
        }

    return valmap(summary, groupby(lambda r: r.algorithm, rows))


class SweepReport(object):
    def __init__(
        self,
        family: str,
        config: Dict[str, Any],
        seed: int,
        rng_name: str,
        timestamp: Optional[str] = None,
    ) -> None:
        self.family = family
        self.config = dict(config)
        self.seed = seed
        self.rng_name = rng_name
        self.timestamp = timestamp
        self.rows = []
        self.findings = []
        self.witnesses = []

    def add_row(self, row: RatioRow) -> None:
        self.rows.append(row)
        if not row.passed:
            log.warning(
                "%s exceeds its bound on %s: ratio %s > %s",
                row.algorithm,
                row.digest[:12],
                format_exact(row.ratio),
                format_exact(row.bound),
            )

    def add_findings(self, findings: Iterable[Finding]) -> None:
        for finding in findings:
            self.findings.append(finding)
            if not finding.passed:
                log.warning("Finding %s failed: %s", finding.name, finding.detail)

    def add_witnesses(self, docs: Iterable[Dict[str, Any]]) -> None:
        """Serialized instances behind failed rows or findings."""
        self.witnesses.extend(docs)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows) and all(f.passed for f in self.findings)

    def failed_findings(self) -> List[Finding]:
        return [f for f in self.findings if not f.passed]

    def to_json(self) -> Dict[str, Any]:
        doc = {
            "family": self.family,
            "config": self.config,
            "seed": self.seed,
            "rng": self.rng_name,
            "passed": self.passed,
            "rows": [r.to_csv() for r in self.rows],
            "aggregates": summarize_rows(self.rows),
            "findings": summarize_findings(self.findings),
            "failed_findings": [f.to_json() for f in self.failed_findings()],
            "witnesses": self.witnesses,
        }
        if self.timestamp is not None:
            doc["timestamp"] = self.timestamp
        return doc

    def write(self, out_dir: str) -> Tuple[str, str]:
        """Writes <out_dir>/<family>.csv and <out_dir>/<family>.json; returns both paths."""
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, "{}.csv".format(self.family))
        json_path = os.path.join(out_dir, "{}.json".format(self.family))
        with open(csv_path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in self.rows:
                writer.writerow(row.to_csv())
        with open(json_path, "w") as f:
            f.write(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")
        log.info("Wrote %s and %s", csv_path, json_path)
        return csv_path, json_path
