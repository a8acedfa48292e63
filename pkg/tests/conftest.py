"""Shared fixtures; expensive solver runs are session-scoped and timed."""

import time

import numpy as np
import pytest

from cgm.baselines import eg_run, gda_run
from cgm.cgm_min import MinSolverConfig, cgm_min_run
from cgm.cgm_vi import VISolverConfig, cgm_vi_run
from cgm.problems import hbg_instantiate, rap_generate, rap_unconstrained_min
from cgm.reference import solve_rap_reference


def _timed(fn, *args, **kwargs):
    tic = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - tic


@pytest.fixture(scope="session")
def rap_problem():
    return rap_generate(50, seed=42)


@pytest.fixture(scope="session")
def rap_reference(rap_problem):
    (x_star, f_star, cert), seconds = _timed(solve_rap_reference, rap_problem.data)
    return {"x_star": x_star, "f_star": f_star, "cert": cert, "seconds": seconds}


@pytest.fixture(scope="session")
def rap_floor(rap_problem):
    return rap_unconstrained_min(rap_problem.data)[1]


@pytest.fixture(scope="session")
def min_trace_constant(rap_problem, rap_reference):
    config = MinSolverConfig(horizon=2000, schedule="constant")
    reference = (rap_reference["x_star"], rap_reference["f_star"])
    trace, seconds = _timed(cgm_min_run, rap_problem, config, reference=reference)
    return {"trace": trace, "seconds": seconds}


@pytest.fixture(scope="session")
def min_trace_varying(rap_problem, rap_reference):
    config = MinSolverConfig(horizon=2000, schedule="varying")
    reference = (rap_reference["x_star"], rap_reference["f_star"])
    trace, seconds = _timed(cgm_min_run, rap_problem, config, reference=reference)
    return {"trace": trace, "seconds": seconds}


@pytest.fixture(scope="session")
def hbg_problem():
    return hbg_instantiate(50, 0.8, seed=42)


@pytest.fixture(scope="session")
def vi_trace(hbg_problem):
    trace, seconds = _timed(cgm_vi_run, hbg_problem, VISolverConfig(horizon=3000))
    return {"trace": trace, "seconds": seconds}


@pytest.fixture(scope="session")
def hbg_equilibrium(hbg_problem):
    d = hbg_problem.dim // 2
    return np.full(2 * d, 1.0 / d)


@pytest.fixture(scope="session")
def baseline_traces(hbg_problem):
    gda = gda_run(hbg_problem, 0.005, 1000)
    eg = eg_run(hbg_problem, 1.0 / hbg_problem.ell_F, 1000)
    return {"gda": gda, "eg": eg}
