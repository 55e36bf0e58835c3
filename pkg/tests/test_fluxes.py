import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entroflux.config import SchemeConfig
from entroflux.core import CellField, builtin_problem
from entroflux.fluxes import (
    assemble_interface_fluxes,
    central_entropy_flux_2,
    central_entropy_flux_4,
    central_flux_2,
    central_flux_4,
    godunov_entropy_flux,
    godunov_flux,
    rusanov_entropy_flux,
    rusanov_flux,
    tadmor_entropy_flux,
)

quartic = builtin_problem("nonconvex_quartic")
bl = builtin_problem("buckley_leverett")
lin = builtin_problem("linear_advection")
QF, QE = quartic.flux, quartic.entropy

state = st.floats(-3, 3, allow_nan=False)


def scan_max_abs_fprime(flux, a, b, n=200001):
    s = np.linspace(min(a, b), max(a, b), n)
    return float(np.abs(flux.fprime(s)).max())


def test_rusanov_examples():
    assert float(rusanov_flux(lin.flux, 0.3, 0.8)) == pytest.approx(0.3)
    assert float(rusanov_flux(QF, 2.0, -2.0)) == pytest.approx(6.0, abs=1e-13)


def test_rusanov_entropy_examples():
    F = QE.F
    assert float(rusanov_entropy_flux(QF, QE, 2.0, -2.0)) == pytest.approx(0.5 * (F(2.0) + F(-2.0)), abs=1e-13)
    a = scan_max_abs_fprime(QF, 0.0, 1.0)
    assert float(F(1.0)) == pytest.approx(1 / 5 - 5 / 6)
    want = 0.5 * (0.0 + (-19 / 30) - a * 0.5)
    assert float(rusanov_entropy_flux(QF, QE, 0.0, 1.0)) == pytest.approx(want, abs=1e-9)


def test_godunov_examples():
    assert godunov_flux(QF, 2.0, -2.0) == pytest.approx(1.0, abs=1e-14)
    assert godunov_flux(QF, -2.0, 2.0) == pytest.approx(-0.5625, abs=1e-14)


def test_central_examples():
    assert central_flux_2([0.0, 1.0]) == 0.5
    assert central_flux_2(QF.f(np.array([2.0, 0.0]))) == 0.5
    assert central_flux_4([1.0, 1.0, 1.0, 1.0]) == pytest.approx(1.0)
    assert central_flux_4([0.0, 1.0, 1.0, 0.0]) == pytest.approx(7 / 6)
    # linear advection with U = u^2/2 has F = u^2/2, so states (0, sqrt 2) give F values (0, 1)
    assert float(central_entropy_flux_2(lin.entropy, [0.0, np.sqrt(2.0)])) == pytest.approx(0.5)
    u = 0.7
    assert float(central_entropy_flux_2(QE, [u, u])) == pytest.approx(float(QE.F(u)))
    assert float(central_entropy_flux_4(QE, [u] * 4)) == pytest.approx(float(QE.F(u)))


def test_tadmor_examples():
    # consistency for U = u^2/2 goes through the potential identity
    u = 0.4
    assert float(tadmor_entropy_flux(QE, QF.f(u), u, u)) == pytest.approx(float(QE.F(u)), abs=1e-14)
    # opposite states: the v-average vanishes
    assert float(tadmor_entropy_flux(QE, 123.0, -0.6, 0.6)) == pytest.approx(-0.5 * float(QE.psi(-0.6) + QE.psi(0.6)))
    h = float(rusanov_flux(QF, 0.0, 1.0))
    assert float(QE.psi(0.0)) == 0.0
    assert float(tadmor_entropy_flux(QE, h, 0.0, 1.0)) == pytest.approx(0.5 * h - 0.5 * 19 / 30, abs=1e-14)


@given(state)
def test_consistency(u):
    for spec in (quartic, bl):
        f, e = spec.flux, spec.entropy
        fu, Fu = float(f.f(u)), float(e.F(u))
        tol = 1e-12 * (1 + abs(fu) + abs(Fu))
        assert abs(float(rusanov_flux(f, u, u)) - fu) <= tol
        assert abs(float(godunov_flux(f, u, u)) - fu) <= tol
        assert abs(float(rusanov_entropy_flux(f, e, u, u)) - Fu) <= tol
        assert abs(float(godunov_entropy_flux(f, e, u, u)) - Fu) <= tol
        assert abs(float(central_flux_4(f.f(np.full(4, u)))) - fu) <= tol
        assert abs(float(tadmor_entropy_flux(e, fu, u, u)) - Fu) <= tol


def test_monotone_low_order_fluxes():
    rng = np.random.default_rng(11)
    eps = 1e-6
    for spec in (quartic, bl):
        f = spec.flux
        for yl, yr in rng.uniform(-3, 3, (1000, 2)):
            for h in (rusanov_flux, godunov_flux):
                base = float(h(f, yl, yr))
                assert float(h(f, yl + eps, yr)) - base >= -1e-10
                assert float(h(f, yl, yr + eps)) - base <= 1e-10


def test_rusanov_at_least_as_dissipative_as_godunov():
    rng = np.random.default_rng(12)
    for spec in (quartic, bl):
        f = spec.flux
        for yl, yr in rng.uniform(-3, 3, (1000, 2)):
            avg = 0.5 * float(f.f(yl) + f.f(yr))
            r = abs(float(rusanov_flux(f, yl, yr)) - avg)
            g = abs(float(godunov_flux(f, yl, yr)) - avg)
            assert r >= g - 1e-12 * (1 + abs(avg))


@given(state, state, st.floats(0.5, 5.0))
def test_proper_rusanov_entropy_flux(yl, yr, coef):
    # frozen dissipation: dH/dy_j = U'(y_j) dh/dy_j for both arguments
    h = 1e-6
    for spec in (quartic, bl):
        f, e = spec.flux, spec.entropy
        H = lambda a, b: float(rusanov_entropy_flux(f, e, a, b, coef))  # noqa: E731
        hh = lambda a, b: float(rusanov_flux(f, a, b, coef))  # noqa: E731
        dHl = (H(yl + h, yr) - H(yl - h, yr)) / (2 * h)
        dhl = (hh(yl + h, yr) - hh(yl - h, yr)) / (2 * h)
        dHr = (H(yl, yr + h) - H(yl, yr - h)) / (2 * h)
        dhr = (hh(yl, yr + h) - hh(yl, yr - h)) / (2 * h)
        sc = 1 + abs(dHl) + abs(dHr)
        assert abs(dHl - float(e.Uprime(yl)) * dhl) <= 1e-6 * sc
        assert abs(dHr - float(e.Uprime(yr)) * dhr) <= 1e-6 * sc


@given(state, state)
def test_proper_godunov_entropy_flux(yl, yr):
    # away from switching of the sampled point, dH/dy_j = U'(y_j) dh/dy_j
    h = 1e-7
    f, e = QF, QE
    for j in (0, 1):
        p = [yl, yr]
        q = list(p)
        p[j] -= h
        q[j] += h
        dh = (godunov_flux(f, *q) - godunov_flux(f, *p)) / (2 * h)
        dH = (godunov_entropy_flux(f, e, *q) - godunov_entropy_flux(f, e, *p)) / (2 * h)
        if abs(dh) > 1e-3:
            assert dH == pytest.approx(float(e.Uprime([yl, yr][j])) * dh, rel=1e-4, abs=1e-6)


def test_uniform_field_has_no_antidiffusion():
    y = CellField(np.full(8, 0.7), "frozen", 0.7, 0.7)
    for hf in ("central2", "central4"):
        fs = assemble_interface_fluxes(quartic, y, SchemeConfig("rusanov", hf, "exact_lp", "proper"))
        assert np.allclose(fs.h_ad, 0.0, atol=1e-15) and np.allclose(fs.H_ad, 0.0, atol=1e-15)


def test_quartic_jump_interface():
    y = quartic.initial_field()
    fs = assemble_interface_fluxes(quartic, y, SchemeConfig("rusanov", "central2", "exact_lp", "proper"))
    k = 50  # between cells 49 (u=2) and 50 (u=-2)
    assert fs.coef[k] == pytest.approx(3.0)
    assert fs.h_low[k] == pytest.approx(6.0)
    assert fs.h_high[k] == pytest.approx(0.0, abs=1e-15)
    assert fs.h_ad[k] == pytest.approx(-6.0)
    assert fs.H_low[k] == pytest.approx(0.5 * float(QE.F(2.0) + QE.F(-2.0)))
    # far from the jump the stencils are uniform
    far = np.r_[0:48, 53:101]
    assert np.all(fs.h_ad[far] == 0.0)
    # fourth order reaches one interface further each way (f(2) = f(-2) = 0 hides that here)
    fs4 = assemble_interface_fluxes(bl, bl.initial_field(), SchemeConfig("rusanov", "central4", "exact_lp", "proper"))
    assert np.flatnonzero(fs4.h_ad).tolist() == [39, 40, 41]
    g = assemble_interface_fluxes(quartic, y, SchemeConfig("godunov"))
    assert g.h_low[k] == pytest.approx(1.0) and np.isnan(g.coef[k])


def test_shared_coefficient():
    rng = np.random.default_rng(5)
    y = CellField(rng.uniform(-2, 2, 12), "frozen", 2.0, -2.0)
    fs = assemble_interface_fluxes(quartic, y, SchemeConfig("rusanov", "central2", "exact_lp", "proper"))
    assert np.allclose(fs.h_low, rusanov_flux(QF, fs.y_left, fs.y_right, fs.coef))
    assert np.allclose(fs.H_low, rusanov_entropy_flux(QF, QE, fs.y_left, fs.y_right, fs.coef))


def test_non_finite_arguments_rejected():
    with pytest.raises(ValueError):
        rusanov_flux(QF, np.nan, 0.0)
    with pytest.raises(ValueError):
        godunov_flux(QF, 0.0, np.inf)
