from __future__ import annotations

import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from entroflux import builtin_problem, restrict, run_simulation, variant_config, with_resolution

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

REFINE = 16


@functools.lru_cache(maxsize=None)
def benchmark_run(problem: str, variant: str):
    """Benchmark run at the problem's own resolution (cached for the session)."""
    return run_simulation(builtin_problem(problem), variant_config(variant))


@functools.lru_cache(maxsize=None)
def godunov_fine(problem: str, factor: int):
    """Godunov on a grid ``factor`` times finer, restricted back to the coarse cells."""
    spec = builtin_problem(problem)
    dt = spec.dt / factor if spec.dt else None
    fine = with_resolution(spec, spec.grid.n_cells * factor, dt=dt)
    tr = run_simulation(fine, variant_config("Godunov"))
    return restrict(tr.final, factor)


def rel_l1(u: np.ndarray, v: np.ndarray, norm_of: np.ndarray) -> float:
    return float(np.sum(np.abs(u - v)) / np.sum(np.abs(norm_of)))


@pytest.fixture(scope="session")
def runs():
    return benchmark_run


@pytest.fixture(scope="session")
def reference():
    return lambda problem: godunov_fine(problem, REFINE)
