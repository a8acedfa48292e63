"""Hot numeric kernels, numba-compiled by default.

Set the environment variable ``CGM_PURE_NUMPY=1`` before import to force the
pure-numpy fallbacks (also used automatically when numba is unavailable).
Both paths run the same source; ``benchmarks/kernel_bench.py`` compares them.
"""

import os

import numpy as np

# status codes returned by nonneg_dual_solve
OK = 0
MAX_ITER = 1
UNBOUNDED = 2

_EIG_CUTOFF = 1e-12
_BLOWUP = 1e12


def _psd_solve(sub, rhs):
    """Min-norm solve of a PSD Gram system via eigendecomposition cutoff."""
    w, vecs = np.linalg.eigh(sub)
    cut = _EIG_CUTOFF * max(w[-1], 1.0)
    coeffs = vecs.T @ rhs
    for i in range(w.size):
        if w[i] > cut:
            coeffs[i] /= w[i]
        else:
            coeffs[i] = 0.0
    return vecs @ coeffs


def _nonneg_dual_solve(G, d, tol, max_iter):
    """Minimize 0.5*lam'G lam - d'lam over lam >= 0 (Lawson-Hanson style).

    G is the Gram matrix A A' of the halfspace normals; the gradient
    w = d - G lam equals the primal slack violations, so the stopping rule
    max(w) <= tol on the zero set certifies primal feasibility directly.
    Returns (lam, status, iterations).
    """
    k = G.shape[0]
    lam = np.zeros(k)
    free = np.zeros(k, dtype=np.bool_)
    it = 0
    while True:
        w = d - G @ lam
        best = -1
        bestw = tol
        for i in range(k):
            if not free[i] and w[i] > bestw:
                bestw = w[i]
                best = i
        if best < 0:
            # stationarity must also hold on the positive set; a residual there
            # means the cutoff dropped a null direction (degenerate instance)
            for i in range(k):
                if free[i] and abs(w[i]) > 10.0 * tol:
                    return lam, MAX_ITER, it
            return lam, OK, it
        free[best] = True
        while True:
            it += 1
            if it > max_iter:
                status = UNBOUNDED if np.max(np.abs(lam)) > _BLOWUP else MAX_ITER
                return lam, status, it
            idx = np.where(free)[0]
            m = idx.size
            if m == 0:
                break
            sub = G[idx][:, idx].copy()
            z = _psd_solve(sub, d[idx].copy())
            if np.min(z) > 0.0:
                lam[:] = 0.0
                lam[idx] = z
                if np.max(np.abs(z)) > _BLOWUP:
                    return lam, UNBOUNDED, it
                break
            # step from lam toward z until the first coordinate hits zero
            alpha = 1.0
            for j in range(m):
                if z[j] <= 0.0:
                    lj = lam[idx[j]]
                    denom = lj - z[j]
                    if denom > 0.0:
                        a = lj / denom
                        if a < alpha:
                            alpha = a
            for j in range(m):
                lam[idx[j]] += alpha * (z[j] - lam[idx[j]])
            for j in range(m):
                if z[j] <= 0.0 and lam[idx[j]] <= 1e-14:
                    lam[idx[j]] = 0.0
                    free[idx[j]] = False


def _simplex_project(y):
    """Euclidean projection onto {x >= 0, sum(x) = 1} by sort and threshold."""
    n = y.size
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    rho = 0
    for j in range(n):
        if u[j] > (css[j] - 1.0) / (j + 1.0):
            rho = j
    tau = (css[rho] - 1.0) / (rho + 1.0)
    x = y - tau
    for i in range(n):
        if x[i] < 0.0:
            x[i] = 0.0
    return x


NUMBA_ENABLED = os.environ.get("CGM_PURE_NUMPY", "0") != "1"
if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    # rebind before the caller compiles so the jitted solver sees jitted helpers
    _psd_solve = njit(cache=True)(_psd_solve)
    nonneg_dual_solve = njit(cache=True)(_nonneg_dual_solve)
    simplex_project = njit(cache=True)(_simplex_project)
else:
    nonneg_dual_solve = _nonneg_dual_solve
    simplex_project = _simplex_project
