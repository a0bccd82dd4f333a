"""Metric formulas, frozen to their defining examples."""

import pytest

from vnemb.metrics import compute_metrics


def row(accepted=True, revenue=0.0, cost=0.0, lifetime=0.0, solve_time=0.0):
    return {"accepted": accepted, "revenue": revenue, "cost": cost,
            "lifetime": lifetime, "solve_time": solve_time}


def test_rac_600_of_1000():
    rows = [row(accepted=i < 600, revenue=1.0, cost=1.0, lifetime=1.0)
            for i in range(1000)]
    assert compute_metrics(rows, horizon=10.0).rac == 60.0


def test_lrc_single_request():
    rows = [row(revenue=20.0, cost=30.0, lifetime=100.0)]
    summary = compute_metrics(rows, horizon=500.0)
    assert summary.lrc == pytest.approx(2 / 3)
    assert summary.lrc_defined


def test_lar_single_request():
    rows = [row(revenue=20.0, cost=30.0, lifetime=100.0)]
    assert compute_metrics(rows, horizon=1000.0).lar == pytest.approx(2.0)


def test_zero_accepted_flagged():
    rows = [row(accepted=False, revenue=5.0, lifetime=1.0) for _ in range(4)]
    summary = compute_metrics(rows, horizon=10.0)
    assert summary.lrc == 0.0 and not summary.lrc_defined
    assert summary.rac == 0.0


def test_empty_rows_zero_safe():
    summary = compute_metrics([], horizon=0.0)
    assert (summary.rac, summary.lrc, summary.lar, summary.ast) == (0, 0, 0, 0)


def test_ast_mean_over_all_requests():
    rows = [row(accepted=True, revenue=1, cost=1, lifetime=1, solve_time=0.2),
            row(accepted=False, solve_time=0.4)]
    assert compute_metrics(rows, horizon=1.0).ast == pytest.approx(0.3)


def test_lrc_weighted_by_lifetime():
    rows = [row(revenue=10.0, cost=20.0, lifetime=100.0),
            row(revenue=30.0, cost=30.0, lifetime=1.0)]
    summary = compute_metrics(rows, horizon=100.0)
    expected = (10 * 100 + 30 * 1) / (20 * 100 + 30 * 1)
    assert summary.lrc == pytest.approx(expected)
