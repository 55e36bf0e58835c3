import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entroflux.core import (
    CellField,
    FluxFunction,
    Grid1D,
    builtin_problem,
    extremum_f_on_interval,
    max_abs_fprime_on_interval,
    max_Udoubleprime_on_interval,
    maximize_on_interval,
    with_resolution,
)

PROBLEMS = ["nonconvex_quartic", "buckley_leverett", "linear_advection"]
quartic = builtin_problem("nonconvex_quartic")
bl = builtin_problem("buckley_leverett")

linear = FluxFunction(lambda u: np.asarray(u, dtype=float), lambda u: np.ones_like(np.asarray(u, dtype=float)))
finite = st.floats(-3, 3, allow_nan=False)


def test_linear_max_fprime():
    assert max_abs_fprime_on_interval(linear, -5.0, 3.0) == 1.0


def test_quartic_max_fprime_on_jump():
    assert max_abs_fprime_on_interval(quartic.flux, 2.0, -2.0) == pytest.approx(3.0, abs=1e-14)


def test_quartic_extrema_on_jump():
    assert extremum_f_on_interval(quartic.flux, -2.0, 2.0, "max") == pytest.approx(1.0, abs=1e-14)
    v, s = extremum_f_on_interval(quartic.flux, -2.0, 2.0, "min", return_arg=True)
    assert v == pytest.approx(-0.5625, abs=1e-14)
    assert abs(s) == pytest.approx(math.sqrt(2.5))


def test_bad_mode_rejected():
    with pytest.raises(ValueError):
        extremum_f_on_interval(quartic.flux, 0.0, 1.0, "mid")


def test_non_finite_endpoint_rejected():
    with pytest.raises(ValueError):
        max_abs_fprime_on_interval(quartic.flux, 0.0, np.inf)


@given(finite)
def test_degenerate_interval(u):
    for spec in (quartic, bl):
        assert max_abs_fprime_on_interval(spec.flux, u, u) == pytest.approx(abs(float(spec.flux.fprime(u))), rel=1e-14, abs=1e-15)
        for mode in ("min", "max"):
            assert extremum_f_on_interval(spec.flux, u, u, mode) == pytest.approx(float(spec.flux.f(u)), rel=1e-14, abs=1e-15)


def test_builtin_values():
    assert float(quartic.flux.f(0.0)) == 1.0
    assert float(quartic.flux.f(2.0)) == 0.0
    assert float(bl.flux.f(1.0)) == 1.0
    assert float(quartic.entropy.psi(1.0)) == pytest.approx(19 / 30, abs=1e-15)


def test_unknown_problem():
    with pytest.raises(ValueError, match="valid names"):
        builtin_problem("burgers")


@pytest.mark.parametrize("name", PROBLEMS)
def test_entropy_pair_identities(name):
    spec = builtin_problem(name)
    f, e = spec.flux, spec.entropy
    u = np.random.default_rng(1).uniform(-3, 3, 100)
    h = 1e-5
    # f' against central differences, F' = U' f', psi = U' f - F, U'' >= 0
    assert np.allclose((f.f(u + h) - f.f(u - h)) / (2 * h), f.fprime(u), atol=1e-6)
    dF = (e.F(u + h) - e.F(u - h)) / (2 * h)
    assert np.max(np.abs(dF - e.Uprime(u) * f.fprime(u))) <= 1e-8 * (1 + np.max(np.abs(dF)))
    assert np.allclose(e.psi(u), e.Uprime(u) * f.f(u) - e.F(u), atol=1e-8)
    assert np.all(e.Udoubleprime(u) >= 0)


def brute_extremum(fn, a, b, mode, n=10**6):
    s = np.linspace(min(a, b), max(a, b), n + 1)
    v = fn(s)
    return float(v.max() if mode == "max" else v.min())


@pytest.mark.parametrize("name", ["nonconvex_quartic", "buckley_leverett"])
def test_extremum_matches_scan(name):
    f = builtin_problem(name).flux
    rng = np.random.default_rng(3)
    for _ in range(50):
        a, b = rng.uniform(-3, 3, 2)
        for mode in ("min", "max"):
            got = extremum_f_on_interval(f, a, b, mode)
            # the scan can only miss an interior extremum, by O(grid^2)
            assert got == pytest.approx(brute_extremum(f.f, a, b, mode), abs=1e-8)


@given(finite, finite)
def test_max_fprime_dominates_endpoints(a, b):
    for spec in (quartic, bl):
        m = max_abs_fprime_on_interval(spec.flux, a, b)
        ends = max(abs(float(spec.flux.fprime(a))), abs(float(spec.flux.fprime(b))))
        assert m >= ends - 1e-14 * (1 + ends)


@given(st.floats(1.0, 3.0), st.floats(1.0, 3.0))
def test_max_fprime_endpoint_where_monotone(a, b):
    # f'' = 3u^2 - 2.5 > 0 for u >= 1, so |f'| peaks at an endpoint
    m = max_abs_fprime_on_interval(quartic.flux, a, b)
    ends = max(abs(float(quartic.flux.fprime(a))), abs(float(quartic.flux.fprime(b))))
    assert m == pytest.approx(ends, rel=1e-14)


def test_sampling_path_agrees_with_critical_points():
    g = lambda s: np.sin(3 * np.asarray(s)) + 0.1 * np.asarray(s)  # noqa: E731
    v, s = maximize_on_interval(g, -2.0, 2.0)
    assert v == pytest.approx(brute_extremum(g, -2, 2, "max"), abs=1e-9)
    # without critical points the generic path must still see the global max of |f'|
    q = FluxFunction(quartic.flux.f, quartic.flux.fprime)
    assert max_abs_fprime_on_interval(q, -1.0, 1.0) == pytest.approx(
        max_abs_fprime_on_interval(quartic.flux, -1.0, 1.0), abs=1e-9)


def test_udoubleprime_square_entropy():
    assert np.all(max_Udoubleprime_on_interval(quartic.entropy, np.array([-1.0, 0.0]), np.array([2.0, 0.0])) == 1.0)


def test_grid_and_ghosts():
    g = Grid1D(0.0, 2.0, 100)
    assert g.dx == pytest.approx(0.02)
    assert g.centers[0] == pytest.approx(0.01) and g.interfaces.size == 101
    y = CellField(np.arange(4.0), "frozen", -1.0, 9.0)
    assert list(y.padded(2)) == [-1, -1, 0, 1, 2, 3, 9, 9]
    p = CellField(np.arange(4.0), "periodic")
    assert list(p.padded(2)) == [2, 3, 0, 1, 2, 3, 0, 1]
    with pytest.raises(FloatingPointError):
        CellField(np.array([0.0, np.nan]))
    with pytest.raises(ValueError):
        Grid1D(1.0, 0.0, 10)


def test_quartic_initial_riemann_data():
    y = quartic.initial_field()
    assert len(y) == 100 and y.values[49] == 2.0 and y.values[50] == -2.0
    assert (y.left, y.right) == (2.0, -2.0)
    s = with_resolution(quartic, 200, dt=0.001)
    assert s.grid.n_cells == 200 and s.dt == 0.001


def test_bl_initial_riemann_data():
    y = bl.initial_field()
    assert len(y) == 80 and y.values[39] == -3.0 and y.values[40] == 3.0
    assert bl.dt is None and bl.end_time == 1.0
