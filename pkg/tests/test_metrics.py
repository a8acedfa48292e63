"""Certificate engine: record reduction, slack policy, closed-form gap."""

import numpy as np
import pytest

from cgm.metrics import (
    ABS_SLACK,
    REL_SLACK,
    BoundsReport,
    CertificateRecord,
    ReferenceMissing,
    _check,
    certify_min,
    empirical_grad_bound,
    hbg_gap_closed_form,
    max_violation,
)
from cgm.problems import hbg_instantiate, rap_generate


class TestCheck:
    def test_pass_and_margin(self):
        rec = _check("demo", [1.0, 2.0], [1.5, 2.5])
        assert rec.passed
        assert rec.margin == pytest.approx(0.5)

    def test_worst_point_selected(self):
        rec = _check("demo", [1.0, 2.4], [1.5, 2.5])
        assert rec.lhs == pytest.approx(2.4)

    def test_slack_allows_tiny_overshoot(self):
        lhs = 1.0
        rec = _check("demo", [lhs + 0.5 * (ABS_SLACK + REL_SLACK * lhs)], [lhs])
        assert rec.passed

    def test_clear_violation_fails(self):
        rec = _check("demo", [2.0], [1.0])
        assert not rec.passed

    def test_scalar_rhs_broadcast(self):
        rec = _check("demo", [0.1, 0.2, 0.3], 0.5)
        assert rec.passed


class TestBoundsReport:
    def test_all_pass_aggregation(self):
        ok = CertificateRecord("a", 0.0, 1.0, 1e-9, True)
        bad = CertificateRecord("b", 2.0, 1.0, 1e-9, False)
        assert BoundsReport("min", {}, [ok]).all_pass
        assert not BoundsReport("min", {}, [ok, bad]).all_pass

    def test_csv_lines_layout(self):
        rec = CertificateRecord("a", 0.5, 1.0, 1e-9, True)
        lines = BoundsReport("min", {"C1": 3.0}, [rec]).csv_lines()
        assert lines[0] == "certificate,lhs,rhs,slack,pass"
        assert lines[1].startswith("a,0.5,1,")
        assert lines[-1].startswith("const_C1,3,")


class TestMeasures:
    def test_max_violation_feasible_point(self):
        problem = rap_generate(8, seed=0)
        assert max_violation(problem, problem.x0) <= 1e-12

    def test_max_violation_positive_part(self):
        problem = rap_generate(8, seed=0)
        x = -np.ones(8)
        assert max_violation(problem, x) >= 1.0

    def test_gap_zero_at_equilibrium(self):
        d = 20
        x_eq = np.full(2 * d, 1.0 / d)
        assert abs(hbg_gap_closed_form(x_eq, 0.8)) <= 1e-12

    def test_gap_positive_off_equilibrium(self):
        d = 5
        x = np.zeros(2 * d)
        x[0] = 1.0
        x[d] = 1.0
        assert hbg_gap_closed_form(x, 0.6) > 0.0

    def test_gap_matches_enumeration(self):
        # compare against explicit maximization over simplex vertices
        rng = np.random.default_rng(3)
        d = 4
        beta = 0.7
        u = rng.random(2 * d)
        x = np.concatenate([u[:d] / u[:d].sum(), u[d:] / u[d:].sum()])
        x1, x2 = x[:d], x[d:]
        top = 2 * beta * x1 + (1 - beta) * x2
        bot = -(1 - beta) * x1 + 2 * beta * x2
        best = -np.inf
        for i in range(d):
            for j in range(d):
                y = np.zeros(2 * d)
                y[i] = 1.0
                y[d + j] = 1.0
                y1, y2 = y[:d], y[d:]
                val = float(top @ (x1 - y1) + bot @ (x2 - y2))
                best = max(best, val)
        assert hbg_gap_closed_form(x, beta) == pytest.approx(best)

    def test_empirical_grad_bound(self):
        problem = hbg_instantiate(5, 0.5, seed=0)
        xs = np.stack([problem.x0, problem.x0 * 0.5])
        bound = empirical_grad_bound(problem.constraints, xs)
        # block-sum rows have gradient norm sqrt(d); coordinate rows norm 1
        assert bound == pytest.approx(np.sqrt(5.0))


class TestCertify:
    def test_missing_reference_raises(self, min_trace_constant, rap_problem):
        with pytest.raises(ReferenceMissing):
            certify_min(min_trace_constant["trace"], rap_problem, None, 0.0)

    def test_min_report_structure(
        self, min_trace_constant, rap_problem, rap_reference, rap_floor
    ):
        reference = (rap_reference["x_star"], rap_reference["f_star"])
        report = certify_min(
            min_trace_constant["trace"], rap_problem, reference, rap_floor
        )
        names = {rec.name for rec in report.records}
        assert "per_iteration_contraction" in names
        assert "velocity_bound_C1" in names
        assert "feasibility_constant_step" in names
        assert report.constants["C1"] > 0
