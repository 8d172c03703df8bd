import json
from fractions import Fraction

from .report import CSV_COLUMNS, Finding, RatioRow, SweepReport, summarize_findings, summarize_rows


def row(alg_cost, opt_cost, bound=None, opt_max_cost=None, algorithm="sd"):
    return RatioRow(
        "ab" * 32, algorithm, 3, 3, alg_cost, opt_cost, opt_max_cost, bound, "requests [2, 2, 2]"
    )


def test_finding_compare():
    finding = Finding.compare("main-bound", 4, Fraction(9, 2))
    assert finding.passed
    assert finding.slack == Fraction(1, 2)
    assert finding.to_json() == {
        "name": "main-bound",
        "lhs": "4",
        "rhs": "9/2",
        "slack": "1/2",
        "passed": True,
        "detail": "",
    }
    assert not Finding.compare("main-bound", 5, 4).passed


def test_finding_equal_and_holds():
    assert Finding.equal("cavity-tree-max-weight", 2, Fraction(4, 2)).passed
    assert not Finding.equal("cavity-tree-max-weight", 1, 2).passed
    finding = Finding.holds("conjugate", [], "nothing matched")
    assert not finding.passed
    assert finding.slack is None
    assert finding.to_json()["lhs"] is None


def test_ratio_row():
    passing = row(5, 4, bound=3)
    assert passing.ratio == Fraction(5, 4)
    assert passing.passed
    assert passing.to_csv()["ratio"] == "5/4"
    assert passing.to_csv()["ratio_float"] == "1.250000"
    assert passing.to_csv()["digest"] == "abababababab"
    assert passing.to_csv()["opt_max_cost"] == ""

    tstrong = row(5, 5, bound=1, opt_max_cost=4)
    assert tstrong.ratio == Fraction(5, 4)
    assert not tstrong.passed
    assert tstrong.to_csv()["passed"] == "false"

    assert row(0, 0, bound=1).ratio == 0
    assert row(7, 1).passed


def test_summaries():
    findings = [
        Finding.compare("main-bound", 4, 4),
        Finding.compare("main-bound", 2, 6),
        Finding.holds("conjugate", False, "swapped"),
    ]
    assert summarize_findings(findings) == {
        "main-bound": {"checked": 2, "failed": 0, "min_slack": "0"},
        "conjugate": {"checked": 1, "failed": 1, "min_slack": None},
    }
    rows = [row(5, 4, 3), row(2, 1, 1), row(1, 1, 1, algorithm="greedy")]
    assert summarize_rows(rows) == {
        "sd": {"rows": 2, "max_ratio": "2", "failed": 1},
        "greedy": {"rows": 1, "max_ratio": "1", "failed": 0},
    }


def test_sweep_report_write(tmpdir):
    report = SweepReport("sd-tstrong", {"max_n": 3}, 0, "python-random")
    report.add_row(row(5, 4, 3))
    report.add_findings([Finding.compare("main-bound", 4, 4)])
    assert report.passed
    csv_path, json_path = report.write(str(tmpdir.join("reports")))

    with open(csv_path) as f:
        lines = f.read().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1].startswith("abababababab,sd,3,3,5,4,,5/4,1.250000,3,true,")
    assert len(lines) == 2

    with open(json_path) as f:
        text = f.read()
    doc = json.loads(text)
    assert "timestamp" not in doc
    assert doc["passed"]
    assert doc["config"] == {"max_n": 3}
    assert doc["findings"]["main-bound"]["min_slack"] == "0"
    assert text == json.dumps(doc, indent=2, sort_keys=True) + "\n"


def test_sweep_report_failures(tmpdir):
    report = SweepReport("mpfs", {}, 1, "python-random", timestamp="2020-01-01T00:00:00")
    report.add_findings([Finding.holds("monotonicity-sd", False, "r=2")])
    report.add_witnesses([{"requests": [2]}])
    assert not report.passed
    assert [f.name for f in report.failed_findings()] == ["monotonicity-sd"]

    _, json_path = report.write(str(tmpdir))
    with open(json_path) as f:
        doc = json.load(f)
    assert doc["timestamp"] == "2020-01-01T00:00:00"
    assert doc["failed_findings"][0]["detail"] == "r=2"
    assert doc["witnesses"] == [{"requests": [2]}]
    assert not doc["passed"]
