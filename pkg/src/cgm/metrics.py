"""Optimality/feasibility measures and the theoretical-bound certificate engine.

Certificates re-evaluate each proven inequality along a realized trajectory,
post hoc, with a small numerical slack; a report line per inequality records
the worst margin encountered.
"""

import math
from dataclasses import dataclass, field

import numpy as np

ABS_SLACK = 1e-9
REL_SLACK = 1e-7


class ReferenceMissing(Exception):
    pass


@dataclass(frozen=True)
class CertificateRecord:
    """Worst-case evaluation of one inequality: lhs <= rhs + slack at every t."""

    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool

    @property
    def margin(self):
        return self.rhs - self.lhs


@dataclass
class BoundsReport:
    track: str
    constants: dict
    records: list = field(default_factory=list)

    @property
    def all_pass(self):
        return all(rec.passed for rec in self.records)

    def csv_lines(self):
        """Flat CSV section appended to a run's output file."""
        lines = ["certificate,lhs,rhs,slack,pass"]
        for rec in self.records:
            lines.append(
                f"{rec.name},{rec.lhs:.17g},{rec.rhs:.17g},{rec.slack:.17g},"
                f"{int(rec.passed)}"
            )
        for key, val in sorted(self.constants.items()):
            lines.append(f"const_{key},{val:.17g},,,")
        return lines


def _slack(lhs):
    return ABS_SLACK + REL_SLACK * abs(lhs)


def _check(name, lhs_arr, rhs_arr):
    """Reduce pointwise inequalities to the worst-margin record."""
    lhs_arr = np.atleast_1d(np.asarray(lhs_arr, dtype=float))
    rhs_arr = np.broadcast_to(np.asarray(rhs_arr, dtype=float), lhs_arr.shape)
    margins = rhs_arr - lhs_arr
    worst = int(np.argmin(margins))
    lhs, rhs = float(lhs_arr[worst]), float(rhs_arr[worst])
    slack = _slack(lhs)
    passed = bool(np.all(lhs_arr <= rhs_arr + ABS_SLACK + REL_SLACK * np.abs(lhs_arr)))
    return CertificateRecord(name=name, lhs=lhs, rhs=rhs, slack=slack, passed=passed)


def max_violation(problem, x):
    """max(0, max_i g_i(x)) over the problem's constraint list."""
    worst = 0.0
    for g in problem.constraints:
        worst = max(worst, g.value(x))
    return worst


def hbg_gap_closed_form(x, beta):
    """Strong gap max_{y in product simplex} <F(x), x - y> in closed form."""
    d = x.size // 2
    x1, x2 = x[:d], x[d:]
    top = 2.0 * beta * x1 + (1.0 - beta) * x2
    bot = -(1.0 - beta) * x1 + 2.0 * beta * x2
    fx_dot_x = float(top @ x1 + bot @ x2)
    return fx_dot_x - float(np.min(top)) - float(np.min(bot))


def empirical_grad_bound(constraints, xs):
    """Max gradient norm of any constraint over the realized iterates."""
    worst = 0.0
    for x in xs:
        for g in constraints:
            worst = max(worst, float(np.linalg.norm(g.gradient(x))))
    return worst


def certify_min(trace, problem, reference, f_star_unconstrained):
    """Evaluate every proven bound of the minimization track along the trace."""
    if reference is None:
        raise ReferenceMissing("certify_min needs the reference (x*, f*)")
    x_star, f_star = reference
    alpha = trace.alpha
    mu, ell_f = problem.mu, problem.ell_f
    kappa = trace.kappa
    T = trace.horizon
    f0 = trace.f_values[0]
    resid = trace.f_values - f_star

    c1_sq = 4.0 * (2.0 * ell_f - alpha) * (f0 - f_star) + 8.0 * ell_f * (
        f_star - f_star_unconstrained
    )
    c1 = math.sqrt(max(c1_sq, 0.0))
    grad_star = float(np.linalg.norm(problem.grad_f(x_star)))
    c2 = (grad_star + math.sqrt(grad_star**2 + 2.0 * mu * max(f0 - f_star, 0.0))) / mu
    ell_g = max((g.smoothness for g in problem.constraints), default=0.0)
    l_g = empirical_grad_bound(problem.constraints, trace.xs)

    report = BoundsReport(
        track="min",
        constants={"C1": c1, "C2": c2, "empirical_Lg": l_g, "ell_g": ell_g},
    )
    recs = report.records

    if T >= 1:
        recs.append(
            _check(
                "per_iteration_contraction",
                resid[1:],
                (1.0 - alpha * trace.etas) * resid[:-1],
            )
        )
    recs.append(_check("velocity_bound_C1", trace.v_norms, c1))
    dists = np.linalg.norm(trace.xs - x_star, axis=1)
    recs.append(_check("distance_bound_C2", dists, c2))
    sharp_rhs = 4.0 * (2.0 * ell_f - alpha) * resid[:-1] + 8.0 * ell_f * (
        f_star - f_star_unconstrained
    )
    recs.append(_check("velocity_bound_per_iter", trace.v_norms**2, sharp_rhs))

    # feasibility bounds are proven for alpha = mu only
    if abs(alpha - mu) <= 1e-12 * mu:
        viol = trace.max_violation
        if trace.config.schedule == "constant":
            rhs = c1 / mu * max(c1 * ell_g / (2.0 * mu), l_g) * math.log(T) / T
            recs.append(_check("feasibility_constant_step", viol, rhs))
        else:
            t_idx = np.arange(1, T)  # bounds g_i(x^{t+1}) for t >= 1
            rhs = 2.0 * c1 / (mu * (t_idx + kappa + 1.0)) * (
                l_g + ell_g * c1 / (2.0 * mu)
            ) + ell_g * c1**2 * np.log(t_idx) / (mu**2 * (t_idx + kappa + 1.0))
            recs.append(_check("feasibility_varying_step", viol[2:], rhs))
    return report


def certify_vi(trace, problem):
    """Evaluate every proven bound of the VI track along the trace."""
    mu, ell_f_op = problem.mu, problem.ell_F
    kappa = trace.kappa
    delta = trace.delta
    T = trace.horizon
    energy = trace.normFx0_sq + problem.B

    c3 = math.sqrt((2.0 * delta + 1.25) * energy / ell_f_op**2)
    c4 = math.sqrt((16.0 * delta + 20.0) * energy)
    constraints = problem.constraints + (trace.aux.as_constraint(),)
    ell_g = max(g.smoothness for g in constraints)
    l_g = empirical_grad_bound(constraints, trace.xs)

    report = BoundsReport(
        track="vi",
        constants={"C3": c3, "C4": c4, "empirical_Lg": l_g, "ell_g": ell_g,
                   "delta": delta},
    )
    recs = report.records

    recs.append(_check("distance_bound_C3", trace.dist_x0, c3))
    recs.append(_check("velocity_bound_C4", trace.v_norms, c4))
    ctrl_rhs = 8.0 * ell_f_op**2 * trace.dist_x0[:-1] ** 2 + 10.0 * energy
    recs.append(_check("velocity_distance_control", trace.v_norms**2, ctrl_rhs))

    denom = T + 32.0 * kappa**2 - 3.0
    x_bar = trace.ergodic
    if problem.simplex_blocks is not None:
        beta = problem.mu / 2.0
        gap = hbg_gap_closed_form(x_bar, beta)
        gap_rhs = (
            2.0 * mu * problem.diameter_D**2
            * (8.0 * kappa**2 - 1.0) * (16.0 * kappa**2 - 1.0) / (T * denom)
            + (16.0 * delta + 20.0) * energy / (mu * denom)
        )
        recs.append(_check("ergodic_gap_bound", gap, gap_rhs))

    if T >= 2:
        t_idx = np.arange(1, T)
        nonerg_rhs = 2.0 * c4 / (mu * (t_idx + 16.0 * kappa**2 + 1.0)) * (
            l_g + ell_g * c4 / (2.0 * mu)
        ) + ell_g * c4**2 * np.log(t_idx) / (mu**2 * (t_idx + 16.0 * kappa**2 + 1.0))
        recs.append(_check("feasibility_nonergodic", trace.max_violation[2:], nonerg_rhs))

    erg_viol = max(0.0, max(g.value(x_bar) for g in constraints))
    erg_rhs = 4.0 * c4 / (mu * denom) * (l_g + ell_g * c4 / (2.0 * mu)) + (
        2.0 * ell_g * c4**2 * math.log(T) / (mu**2 * denom)
    )
    recs.append(_check("feasibility_ergodic", erg_viol, erg_rhs))
    return report
