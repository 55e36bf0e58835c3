"""Interface numerical fluxes and their numerical entropy fluxes.

Proper entropy fluxes (those with dH/dy_j = U'(y_j) dh/dy_j for every stencil
argument) are:

* Rusanov: the same dissipation coefficient ``a = max |f'|`` multiplies the
  jump in U instead of the jump in y. The identity holds wherever the
  location of the maximum does not switch.
* Godunov: ``F(u*)`` where ``u*`` is the point at which f attains its min/max
  on the interval. When ``u*`` is an endpoint the derivative is
  ``U'(y) f'(y)``; when it is interior both sides vanish.
* Central fluxes: substituting F for f. Each term ``f(y_j)`` contributes
  ``w f'(y_j)`` to dh/dy_j, and ``w F'(y_j) = w U'(y_j) f'(y_j)`` to dH/dy_j,
  so the substitution is proper; consistency fixes the additive constant.

Interface ``k`` (``0 <= k <= n``) sits between cells ``k - 1`` and ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from entroflux.config import SchemeConfig
from entroflux.core import (
    CellField,
    EntropyPair,
    FluxFunction,
    ProblemSpec,
    extremum_f_on_interval,
    max_abs_fprime_on_interval,
)

N_GHOST = 2


def _check(*values) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite flux argument: {v!r}")


def rusanov_flux(flux: FluxFunction, yl, yr, coef=None):
    _check(yl, yr)
    if coef is None:
        coef = max_abs_fprime_on_interval(flux, yl, yr)
    return 0.5 * (flux.f(yl) + flux.f(yr) - coef * (np.asarray(yr) - yl))


def rusanov_entropy_flux(flux: FluxFunction, entropy: EntropyPair, yl, yr, coef=None):
    _check(yl, yr)
    if coef is None:
        coef = max_abs_fprime_on_interval(flux, yl, yr)
    return 0.5 * (entropy.F(yl) + entropy.F(yr) - coef * (entropy.U(yr) - entropy.U(yl)))


def godunov_state(flux: FluxFunction, yl, yr):
    """Point where the Godunov flux samples f: argmin if yl <= yr else argmax."""
    _check(yl, yr)
    yl = np.atleast_1d(np.asarray(yl, dtype=float))
    yr = np.atleast_1d(np.asarray(yr, dtype=float))
    _, smin = extremum_f_on_interval(flux, yl, yr, "min", return_arg=True)
    _, smax = extremum_f_on_interval(flux, yl, yr, "max", return_arg=True)
    return np.where(yl <= yr, smin, smax)


def godunov_flux(flux: FluxFunction, yl, yr):
    _check(yl, yr)
    scalar = np.ndim(yl) == 0 and np.ndim(yr) == 0
    yl1 = np.atleast_1d(np.asarray(yl, dtype=float))
    yr1 = np.atleast_1d(np.asarray(yr, dtype=float))
    vmin = extremum_f_on_interval(flux, yl1, yr1, "min")
    vmax = extremum_f_on_interval(flux, yl1, yr1, "max")
    out = np.where(yl1 <= yr1, vmin, vmax)
    return float(out[0]) if scalar else out


def godunov_entropy_flux(flux: FluxFunction, entropy: EntropyPair, yl, yr):
    scalar = np.ndim(yl) == 0 and np.ndim(yr) == 0
    out = entropy.F(godunov_state(flux, yl, yr))
    return float(out[0]) if scalar else out


def central_flux_2(g_values) -> np.ndarray:
    """Second-order central average of point values ``(g_i, g_{i+1})``.

    Pass f values for the numerical flux and F values for its proper entropy flux.
    """
    g = np.asarray(g_values, dtype=float)
    return 0.5 * (g[0] + g[1])


def central_flux_4(g_values) -> np.ndarray:
    """Fourth-order central flux from ``(g_{i-1}, g_i, g_{i+1}, g_{i+2})``."""
    g = np.asarray(g_values, dtype=float)
    return 7.0 / 12.0 * (g[1] + g[2]) - 1.0 / 12.0 * (g[3] + g[0])


def central_entropy_flux_2(entropy: EntropyPair, stencil) -> np.ndarray:
    return central_flux_2(entropy.F(np.asarray(stencil, dtype=float)))


def central_entropy_flux_4(entropy: EntropyPair, stencil) -> np.ndarray:
    return central_flux_4(entropy.F(np.asarray(stencil, dtype=float)))


def tadmor_entropy_flux(entropy: EntropyPair, h_num, yl, yr):
    """Tadmor's entropy flux ``avg(v) h - avg(psi)`` with ``v = U'(u)``.

    ``psi`` is stored as a function of the conserved state, so no inversion of
    the entropy variable is needed.
    """
    vl = entropy.Uprime(yl)
    vr = entropy.Uprime(yr)
    return 0.5 * (vl + vr) * h_num - 0.5 * (entropy.psi(yl) + entropy.psi(yr))


@dataclass(frozen=True)
class InterfaceFluxSet:
    """Low/high/antidiffusive numerical fluxes and entropy fluxes at all n+1 interfaces.

    ``coef`` is the Rusanov dissipation coefficient (NaN for Godunov).
    """

    h_low: np.ndarray
    h_high: np.ndarray
    H_low: np.ndarray
    H_high: np.ndarray
    y_left: np.ndarray
    y_right: np.ndarray
    coef: np.ndarray

    @property
    def h_ad(self) -> np.ndarray:
        return self.h_high - self.h_low

    @property
    def H_ad(self) -> np.ndarray:
        return self.H_high - self.H_low

    def hybrid(self, alpha) -> tuple[np.ndarray, np.ndarray]:
        """Hybrid numerical flux and proper entropy flux for limiters ``alpha``."""
        return self.h_low + alpha * self.h_ad, self.H_low + alpha * self.H_ad


def assemble_interface_fluxes(spec: ProblemSpec, y: CellField, config: SchemeConfig) -> InterfaceFluxSet:
    flux, entropy = spec.flux, spec.entropy
    ye = y.padded(N_GHOST)
    n = len(y)
    # interface k uses cells k-1 (left) and k (right) -> padded k+1, k+2
    yl = ye[N_GHOST - 1 : N_GHOST + n]
    yr = ye[N_GHOST : N_GHOST + n + 1]

    if config.low_flux == "rusanov":
        coef = max_abs_fprime_on_interval(flux, yl, yr)
        h_low = rusanov_flux(flux, yl, yr, coef)
        H_low = rusanov_entropy_flux(flux, entropy, yl, yr, coef)
    else:
        coef = np.full(n + 1, np.nan)
        ustar = godunov_state(flux, yl, yr)
        h_low = flux.f(ustar)
        H_low = entropy.F(ustar)

    if config.high_flux == "none":
        h_high, H_high = h_low.copy(), H_low.copy()
    else:
        fe = flux.f(ye)
        Fe = entropy.F(ye)
        if config.high_flux == "central2":
            h_high = central_flux_2([fe[N_GHOST - 1 : N_GHOST + n], fe[N_GHOST : N_GHOST + n + 1]])
            H_high = central_flux_2([Fe[N_GHOST - 1 : N_GHOST + n], Fe[N_GHOST : N_GHOST + n + 1]])
        else:
            st = lambda g: [g[N_GHOST - 2 + j : N_GHOST - 2 + j + n + 1] for j in range(4)]  # noqa: E731
            h_high = central_flux_4(st(fe))
            H_high = central_flux_4(st(Fe))

    return InterfaceFluxSet(
        h_low=np.asarray(h_low, dtype=float),
        h_high=np.asarray(h_high, dtype=float),
        H_low=np.asarray(H_low, dtype=float),
        H_high=np.asarray(H_high, dtype=float),
        y_left=yl,
        y_right=yr,
        coef=np.asarray(coef, dtype=float),
    )
