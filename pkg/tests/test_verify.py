import math
import re

import pytest

from specgap.verify import CHECKS, Row, SuiteConfig, _Tally, check_node_separation, format_table, run_suite

QUICK = SuiteConfig(quick=True)


@pytest.mark.parametrize("check", CHECKS, ids=lambda c: c.__name__)
def test_quick_rows_pass(check):
    row = check(QUICK)
    assert row.passed, row.detail
    assert row.cases > 0 and row.errors == 0


def test_node_separation_not_vacuous():
    row = check_node_separation(QUICK)
    applicable = int(re.match(r"(\d+) applicable", row.detail).group(1))
    assert applicable == row.cases > 0


def test_adversarial_trips_bounds_only():
    rows = {r.name: r for r in run_suite(SuiteConfig(quick=True, adversarial=True))}
    assert not rows["path_gap_bound"].passed
    assert not rows["hypercube_gap_bound"].passed
    assert rows["path_gap_bound"].worst_slack < 0
    assert rows["interlacing"].passed


def test_seed_base_changes_draws():
    a = check_node_separation(SuiteConfig(quick=True, seed_base=0))
    b = check_node_separation(SuiteConfig(quick=True, seed_base=50))
    assert a.passed and b.passed


def test_tally():
    t = _Tally()
    t.add(0.5, "a")
    t.add(-1.0, "b")
    t.fail("c", RuntimeError("boom"))
    row = t.row("x")
    assert (row.cases, row.violations, row.errors, row.worst_slack) == (3, 1, 1, -1.0)
    assert not row.passed and "boom" in row.detail


def test_empty_tally_fails():
    row = _Tally().row("empty")
    assert not row.passed and math.isnan(row.worst_slack)


def test_format_table():
    text = format_table([Row("alpha", True, 3, 0, 0, 1e-3), Row("beta", False, 2, 1, 0, -2.0, detail="bad")])
    lines = text.splitlines()
    assert lines[0].startswith("check")
    assert "pass" in lines[1] and "FAIL" in lines[2] and lines[2].endswith("bad")
