"""Per-cell two-variable constraint rows on the interface limiters.

Every row couples the limiters of the two faces of one cell:

    lower_i <= coef_left_i * alpha_i + coef_right_i * alpha_{i+1} <= upper_i

with interface ``i`` the left face and ``i + 1`` the right face of cell ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from entroflux.core import CellField, EntropyPair
from entroflux.fluxes import N_GHOST, InterfaceFluxSet


@dataclass(frozen=True)
class RowSet:
    lower: np.ndarray
    coef_left: np.ndarray
    coef_right: np.ndarray
    upper: np.ndarray

    def __len__(self) -> int:
        return self.lower.size

    def evaluate(self, alpha: np.ndarray) -> np.ndarray:
        return self.coef_left * alpha[:-1] + self.coef_right * alpha[1:]

    def violation(self, alpha: np.ndarray) -> np.ndarray:
        """Per-row amount by which ``alpha`` misses the row bounds (0 if satisfied)."""
        v = self.evaluate(alpha)
        return np.maximum(np.maximum(self.lower - v, v - self.upper), 0.0)


def neighbour_extrema(y: CellField) -> tuple[np.ndarray, np.ndarray]:
    ye = y.padded(N_GHOST)
    n = len(y)
    stencil = np.stack([ye[N_GHOST - 1 : N_GHOST - 1 + n], ye[N_GHOST : N_GHOST + n], ye[N_GHOST + 1 : N_GHOST + 1 + n]])
    return stencil.min(axis=0), stencil.max(axis=0)


def build_bound_rows(fluxes: InterfaceFluxSet, y: CellField, dx: float, dt: float) -> RowSet:
    """Local-extremum rows ``Q^- <= -a_{i+1} hAD_{i+1} + a_i hAD_i <= Q^+``."""
    ymin, ymax = neighbour_extrema(y)
    dh = fluxes.h_low[1:] - fluxes.h_low[:-1]
    r = dx / dt
    had = fluxes.h_ad
    return RowSet(
        lower=r * (ymin - y.values) + dh,
        coef_left=had[:-1].copy(),
        coef_right=-had[1:],
        upper=r * (ymax - y.values) + dh,
    )


def default_multipliers(entropy: EntropyPair, y: CellField) -> np.ndarray:
    return np.asarray(entropy.Uprime(y.values), dtype=float)


def build_entropy_rows(
    fluxes: InterfaceFluxSet,
    y: CellField,
    y_hat_prev: np.ndarray,
    entropy: EntropyPair,
    variant: str,
    dx: float,
    dt: float,
    b: np.ndarray | None = None,
) -> RowSet | None:
    """Cell entropy inequality rows ``W_i <= d_{i,i-1} a_i + d_{i,i+1} a_{i+1}``.

    ``y_hat_prev`` is the current predictor of the new state; it enters only
    through the Bregman-like term ``U(y_hat) - U(y) - b (y_hat - y)``.
    """
    if variant == "none":
        return None
    u = y.values
    y_hat_prev = np.asarray(y_hat_prev, dtype=float)
    r = dx / dt
    inf = np.full(u.size, np.inf)

    if variant == "proper":
        if b is None:
            b = default_multipliers(entropy, y)
        hL, HL = fluxes.h_low, fluxes.H_low
        W = (
            r * (entropy.U(y_hat_prev) - entropy.U(u) - b * (y_hat_prev - u))
            + HL[1:] - b * hL[1:] - HL[:-1] + b * hL[:-1]
        )
        d_right = b * fluxes.h_ad[1:] - fluxes.H_ad[1:]
        d_left = -(b * fluxes.h_ad[:-1] - fluxes.H_ad[:-1])
        return RowSet(W, d_left, d_right, inf)

    if variant == "tadmor":
        v = entropy.Uprime(u)
        dv = entropy.Uprime(fluxes.y_right) - entropy.Uprime(fluxes.y_left)
        dpsi = entropy.psi(fluxes.y_right) - entropy.psi(fluxes.y_left)
        prod = 0.5 * (dpsi - fluxes.h_low * dv)
        rhs = prod[1:] + prod[:-1] + r * (v * (y_hat_prev - u) - (entropy.U(y_hat_prev) - entropy.U(u)))
        coef = -0.5 * dv * fluxes.h_ad
        return RowSet(-rhs, coef[:-1].copy(), coef[1:].copy(), inf)

    raise ValueError(f"unknown entropy variant {variant!r}")


def hybrid_update(y: CellField, fluxes: InterfaceFluxSet, alpha: np.ndarray, dx: float, dt: float) -> np.ndarray:
    h = fluxes.h_low + alpha * fluxes.h_ad
    return y.values - dt / dx * (h[1:] - h[:-1])
