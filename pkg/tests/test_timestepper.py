from dataclasses import replace

import numpy as np
import pytest
from conftest import benchmark_run, godunov_fine, rel_l1
from hypothesis import given, settings
from hypothesis import strategies as st

import entroflux.timestepper as ts
from entroflux.config import SchemeConfig, variant_config
from entroflux.core import CellField, builtin_problem, with_resolution
from entroflux.limiters import LimiterError
from entroflux.rows import neighbour_extrema
from entroflux.timestepper import (
    ENTROPY_TOL,
    TimeStepError,
    check_time_step,
    l1_distance,
    restrict,
    run_simulation,
    step,
)
from entroflux.verify import random_state

quartic = builtin_problem("nonconvex_quartic")
bl = builtin_problem("buckley_leverett")
lin = builtin_problem("linear_advection")
seeds = st.integers(0, 2**32 - 1)


def shock_groups(u, threshold=1.0):
    """Maximal runs of neighbouring interfaces with |du| > threshold."""
    big = np.flatnonzero(np.abs(np.diff(u)) > threshold)
    if big.size == 0:
        return []
    return np.split(big, np.flatnonzero(np.diff(big) > 1) + 1)


# {{{ time-step restrictions


def test_linear_flux_at_unit_courant():
    y = CellField(np.random.default_rng(0).uniform(0, 1, 100), "periodic")
    r = check_time_step(lin, y, lin.grid.dx)
    assert r.ok
    assert r.monotone_ratio == pytest.approx(1.0, abs=1e-12)
    u = CellField(np.full(100, 0.3), "periodic")
    assert check_time_step(lin, u, lin.grid.dx).monotone_ratio == 1.0


def test_quartic_benchmark_step_is_admissible():
    r = check_time_step(quartic, quartic.initial_field(), 0.002)
    assert r.ok and r.ratio <= 0.6
    assert check_time_step(quartic, quartic.initial_field(), 0.05).ok is False


@settings(max_examples=100)
@given(seeds)
def test_quartic_benchmark_step_admissible_for_any_state(seed):
    rng = np.random.default_rng(seed)
    y = CellField(rng.uniform(-2, 2, 100), "frozen", 2.0, -2.0)
    for lf in ("rusanov", "godunov"):
        assert check_time_step(quartic, y, 0.002, lf).ok


def test_zero_step():
    r = check_time_step(quartic, quartic.initial_field(), 0.0)
    assert r.ok and r.ratio == 0.0


@settings(max_examples=100)
@given(seeds)
def test_ratio_is_linear_in_dt(seed):
    spec, y, dt = random_state(np.random.default_rng(seed))
    a = check_time_step(spec, y, dt)
    b = check_time_step(spec, y, 2 * dt)
    assert b.ratio == pytest.approx(2 * a.ratio, rel=1e-9, abs=1e-12)


# }}}


# {{{ single steps


@pytest.mark.parametrize("name", ["Godunov", "Rusanov", "RusanovLP2", "RusanovLE2", "RusanovAE4", "RusanovLET2"])
def test_uniform_field_unchanged(name):
    y = CellField(np.full(10, 1.3), "frozen", 1.3, 1.3)
    y1, diag = step(quartic, y, variant_config(name), 0.002)
    assert np.array_equal(y1.values, y.values)
    assert np.allclose(diag.proper_residual, 0.0, atol=1e-14)


@settings(max_examples=200)
@given(seeds, st.sampled_from(["Godunov", "Rusanov"]))
def test_monotone_step_bounds_and_entropy(seed, name):
    spec, y, dt = random_state(np.random.default_rng(seed))
    if spec.name == "linear_advection" and name == "Godunov":
        name = "Rusanov"
    y1, diag = step(spec, y, variant_config(name), dt)
    ymin, ymax = neighbour_extrema(y)
    assert np.all(y1.values >= ymin - 1e-12) and np.all(y1.values <= ymax + 1e-12)
    scale = 1.0 + float(np.max(np.abs(spec.entropy.U(y.values))))
    assert np.max(diag.proper_residual) <= 1e-12 * scale


def test_unlimited_central_step_at_the_jump():
    cfg = SchemeConfig("rusanov", "central2", "unlimited", "none")
    y = quartic.initial_field()
    y1, diag = step(quartic, y, cfg, 0.002)
    # f(2) = f(-2) = 0, so the central fluxes all vanish and the jump does not move
    assert np.array_equal(y1.values, y.values)
    assert diag.alpha[50] == 1.0 and diag.alpha[0] == 0.0


# }}}


# {{{ runs


def test_linear_advection_crossing():
    tr = run_simulation(lin, variant_config("Rusanov"))
    assert tr.step_times[-1] == 1.0
    assert tr.max_ledger_error() <= 1e-12
    u0, u1 = tr.snapshots[0][1], tr.final
    assert abs(u1.sum() - u0.sum()) * lin.grid.dx <= 1e-12
    # back at the start after one period, centred where it began (circular mean on the periodic domain)
    phase = np.exp(2j * np.pi * tr.x)
    assert np.angle(np.sum(u1 * phase)) == pytest.approx(np.angle(np.sum(u0 * phase)), abs=1e-9)
    assert u1.max() < 1.0


def test_fixed_dt_violation_raises_before_stepping():
    with pytest.raises(TimeStepError):
        run_simulation(quartic, variant_config("Rusanov"), dt=0.05)
    tr = run_simulation(quartic, variant_config("Rusanov"), dt=0.05, raise_on_error=False)
    assert tr.error and tr.n_steps == 0 and len(tr.snapshots) == 1


def test_adaptive_lands_on_snapshots():
    spec = with_resolution(quartic, 40, end_time=0.3)
    spec = replace(spec, dt=None)
    tr = run_simulation(spec, variant_config("Rusanov"), "adaptive", [0.1, 0.2], courant=0.9)
    assert [t for t, _ in tr.snapshots] == [0.0, 0.1, 0.2, 0.3]
    assert tr.step_times[-1] == 0.3
    assert tr.metadata["dt_policy"] == "adaptive" and tr.metadata["dt_max"] > 0


def test_limiter_failure_keeps_partial_trace(monkeypatch):
    calls = {"n": 0}
    real = ts.solve_step_limiters

    def flaky(*a, **k):
        calls["n"] += 1
        if calls["n"] == 4:
            raise LimiterError("boom")
        return real(*a, **k)

    monkeypatch.setattr(ts, "solve_step_limiters", flaky)
    spec = with_resolution(quartic, 40, end_time=0.02)
    tr = run_simulation(spec, variant_config("RusanovLE2"), raise_on_error=False)
    assert "boom" in tr.error and tr.n_steps == 3
    calls["n"] = 0
    with pytest.raises(LimiterError):
        run_simulation(spec, variant_config("RusanovLE2"))


def test_restrict_and_distance():
    fine = np.repeat(np.arange(4.0), 3)
    assert np.array_equal(restrict(fine, 3), np.arange(4.0))
    with pytest.raises(ValueError):
        restrict(np.ones(5), 2)
    assert l1_distance(np.ones(3), np.zeros(3), 0.5) == 1.5


def test_godunov_reference_is_self_convergent(reference):
    ref = reference("nonconvex_quartic")
    g8 = godunov_fine("nonconvex_quartic", 8)
    assert rel_l1(g8, ref, ref) <= 0.02


def test_godunov_closer_to_reference_than_rusanov(reference):
    ref = reference("nonconvex_quartic")
    god = benchmark_run("nonconvex_quartic", "Godunov").final
    rus = benchmark_run("nonconvex_quartic", "Rusanov").final
    assert np.sum(np.abs(god - ref)) <= np.sum(np.abs(rus - ref))


def test_buckley_leverett_godunov_structure():
    u = benchmark_run("buckley_leverett", "Godunov").final
    groups = shock_groups(u)
    assert len(groups) == 2
    # between the two shocks the solution rises monotonically (the rarefaction fan)
    between = u[groups[0][-1] + 1 : groups[1][0] + 1]
    assert np.all(np.diff(between) >= 0)


def test_tadmor_constrained_run_violates_proper_inequality():
    tr = benchmark_run("nonconvex_quartic", "RusanovLET2")
    assert max(tr.max_tadmor_residual) <= ENTROPY_TOL
    assert max(tr.max_proper_residual) > 0


@pytest.mark.parametrize("problem,variant", [
    ("nonconvex_quartic", "RusanovLE2"),
    ("nonconvex_quartic", "RusanovAE2"),
    ("nonconvex_quartic", "RusanovLE4"),
    ("nonconvex_quartic", "RusanovAE4"),
    ("buckley_leverett", "RusanovLE2"),
    ("buckley_leverett", "RusanovAE2"),
])
def test_accepted_hybrid_steps_are_entropy_stable(problem, variant):
    tr = benchmark_run(problem, variant)
    conv = [r for r, ok in zip(tr.max_proper_residual, tr.step_converged) if ok]
    assert conv and max(conv) <= ENTROPY_TOL
    assert tr.max_ledger_error() <= 1e-12
    if variant == "RusanovLE2":
        # the exact limiter's converged steps meet the tighter limiter tolerance
        assert max(conv) <= 1e-9


# }}}
