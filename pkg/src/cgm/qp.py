"""Least-distance projection onto a small polytope of halfspace rows.

Solves min_{v : A v <= b} ||v + c||^2 through its nonnegatively constrained
dual (Gram form), plus an exhaustive active-set oracle and a KKT checker used
to certify every solution.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import nnls

from ._kernels import OK, UNBOUNDED, nonneg_dual_solve


def _recover_duals(a, b, c, v):
    """Nonnegative multipliers for a known optimum v (oracle fallback path)."""
    slack = a @ v - b
    lam = np.zeros(a.shape[0])
    active = np.where(slack >= -1e-8 * (1.0 + np.abs(b)))[0]
    if active.size:
        sol, _ = nnls(a[active].T, -(v + c))
        lam[active] = sol
    return lam

DEGENERATE_NORMAL = 1e-14


class QpError(Exception):
    pass


class Infeasible(QpError):
    """The polytope admits no feasible point (or a row certifies 0 > rhs)."""


class MaxIterations(QpError):
    """The dual active-set loop stalled; retry with a looser tolerance."""


@dataclass(frozen=True)
class HalfspaceRow:
    """One linear inequality normal . v <= rhs."""

    normal: np.ndarray
    rhs: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "rhs", float(self.rhs))
        if not np.all(np.isfinite(normal)) or not np.isfinite(self.rhs):
            raise ValueError("halfspace row must be finite")
        if np.linalg.norm(normal) < DEGENERATE_NORMAL and self.rhs < 0:
            raise Infeasible("zero normal with negative rhs: 0 <= rhs is violated")


@dataclass(frozen=True)
class VelocityPolytope:
    """Conjunction of halfspace rows in R^dimension; no rows means all of R^n."""

    rows: tuple
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        for row in self.rows:
            if row.normal.size != self.dimension:
                raise ValueError("row dimension mismatch")

    def matrix(self):
        """Stacked (A, b) over all rows; (0, n) matrix when empty."""
        if not self.rows:
            return np.zeros((0, self.dimension)), np.zeros(0)
        a = np.stack([row.normal for row in self.rows])
        b = np.array([row.rhs for row in self.rows])
        return a, b


@dataclass(frozen=True)
class ProjectionResult:
    v: np.ndarray
    dual: np.ndarray
    kkt_residual: float
    iterations: int


def _active_rows(polytope):
    """Indices of non-degenerate rows; degenerate rows with rhs >= 0 are vacuous."""
    keep = []
    for i, row in enumerate(polytope.rows):
        if np.linalg.norm(row.normal) < DEGENERATE_NORMAL:
            if row.rhs < 0:
                raise Infeasible("degenerate row with negative rhs")
            continue
        keep.append(i)
    return keep


def project_velocity(target, polytope, tol=1e-10):
    """Project -target onto the polytope; certify the KKT system of the result.

    Raises Infeasible when the dual is unbounded (empty polytope interior) and
    MaxIterations when the active-set loop stalls.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    c = np.asarray(target, dtype=float)
    if not np.all(np.isfinite(c)):
        raise ValueError("target must be finite")

    keep = _active_rows(polytope)
    dual = np.zeros(len(polytope.rows))
    v0 = -c
    a_full, b_full = polytope.matrix()
    if not keep or np.all(a_full[keep] @ v0 <= b_full[keep]):
        result = ProjectionResult(v=v0, dual=dual, kkt_residual=0.0, iterations=0)
        return ProjectionResult(
            v=v0,
            dual=dual,
            kkt_residual=kkt_residual_qp(result, c, polytope),
            iterations=0,
        )

    a = a_full[keep]
    b = b_full[keep]
    gram = a @ a.T
    lin = -a @ c - b
    max_iter = 50 * (len(keep) + 1)
    lam, status, iters = nonneg_dual_solve(gram, lin, tol, max_iter)
    if status != OK:
        # degenerate instance: fall back to the exhaustive oracle when small
        if len(keep) <= 16:
            v = brute_force_projection(c, polytope)  # raises Infeasible if empty
            lam = _recover_duals(a, b, c, v)
        elif status == UNBOUNDED:
            raise Infeasible("dual unbounded: velocity polytope is empty")
        else:
            raise MaxIterations(f"no convergence within {max_iter} iterations")

    # polish: exact least-squares resolve on the identified active set
    active = np.where(lam > 0)[0]
    if active.size:
        sub = gram[np.ix_(active, active)]
        sol, *_ = np.linalg.lstsq(sub, lin[active], rcond=None)
        if np.min(sol) >= 0:
            lam = np.zeros_like(lam)
            lam[active] = sol

    v = -c - a.T @ lam
    dual[keep] = lam
    result = ProjectionResult(v=v, dual=dual, kkt_residual=0.0, iterations=iters)
    residual = kkt_residual_qp(result, c, polytope)
    gate = max(tol, 1e3 * tol * (1.0 + np.linalg.norm(c)))
    if residual > gate and len(keep) <= 16:
        # near-degenerate active set: redo with the exhaustive oracle
        v = brute_force_projection(c, polytope)
        lam = _recover_duals(a, b, c, v)
        dual = np.zeros(len(polytope.rows))
        dual[keep] = lam
        result = ProjectionResult(v=v, dual=dual, kkt_residual=0.0, iterations=iters)
        residual = kkt_residual_qp(result, c, polytope)
    if residual > gate:
        raise MaxIterations(f"KKT residual {residual:.3e} above tolerance")
    return ProjectionResult(v=v, dual=dual, kkt_residual=residual, iterations=iters)


def brute_force_projection(target, polytope):
    """Exhaustive oracle: solve every active subset's KKT system, keep the best.

    Exponential in the row count; intended for small verification instances.
    Among objective ties the lexicographically smallest subset wins.
    """
    c = np.asarray(target, dtype=float)
    keep = _active_rows(polytope)
    a_full, b_full = polytope.matrix()
    a = a_full[keep]
    b = b_full[keep]
    k = len(keep)

    best_v = None
    best_obj = np.inf
    for size in range(k + 1):
        for subset in combinations(range(k), size):
            idx = np.array(subset, dtype=int)
            if idx.size == 0:
                v = -c
                lam = np.zeros(0)
            else:
                sub = a[idx] @ a[idx].T
                rhs = -a[idx] @ c - b[idx]
                lam, *_ = np.linalg.lstsq(sub, rhs, rcond=1e-11)
                if np.min(lam) < -1e-9:
                    continue
                v = -c - a[idx].T @ lam
            slack = a @ v - b
            if k and np.max(slack) > 1e-9:
                continue
            obj = float(np.dot(v + c, v + c))
            if obj < best_obj - 1e-12:
                best_obj = obj
                best_v = v
    if best_v is None:
        raise Infeasible("no subset KKT system yields a feasible point")
    return best_v


def kkt_residual_qp(result, target, polytope):
    """Max of stationarity norm, positive primal violation, and complementarity."""
    c = np.asarray(target, dtype=float)
    v = result.v
    lam = result.dual
    if lam.size != len(polytope.rows):
        raise ValueError("dual length must equal row count")
    a, b = polytope.matrix()
    if a.shape[0] == 0:
        return float(np.linalg.norm(v + c))
    slack = a @ v - b
    stationarity = np.linalg.norm(v + c + a.T @ lam)
    primal = max(0.0, float(np.max(slack)))
    # scale by multiplier size: near-parallel rows make lam huge while the
    # product lam*slack stays a faithful zero up to roundoff in slack alone
    comp = float(np.max(np.abs(lam * slack) / (1.0 + lam)))
    return max(float(stationarity), primal, comp)
