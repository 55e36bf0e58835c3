"""Closed-form feasible limiters (Zalesak-style bound limiting plus entropy limiting).

Conventions at degenerate points:

* ``P^+ = 0`` (or ``P^- = 0``) means no antidiffusive term can push the cell
  toward that bound, so ``R^+ = 1``.
* A row coefficient ``d = 0`` does not involve the interface at all and puts
  no restriction on it (reading ``sgn(0) = 0`` literally would force 0).
* A row that holds for all limiters in ``[0,1]^2`` to within ``ROW_TOL`` is
  ignored.
* A row with ``W > 0`` is infeasible even at zero limiters; both faces of the
  cell are clamped to 0 and the cell is reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from entroflux.core import CellField, EntropyPair
from entroflux.fluxes import InterfaceFluxSet
from entroflux.lp import FEAS_TOL, ROW_TOL
from entroflux.rows import build_bound_rows, build_entropy_rows


@dataclass(frozen=True)
class ApproxWorkspace:
    Q_plus: np.ndarray
    Q_minus: np.ndarray
    P_plus: np.ndarray
    P_minus: np.ndarray
    R_plus: np.ndarray
    R_minus: np.ndarray
    alpha_bar: np.ndarray
    W: np.ndarray | None = None
    d_left: np.ndarray | None = None
    d_right: np.ndarray | None = None
    Y: np.ndarray | None = None
    alpha_tilde: np.ndarray | None = None
    alpha: np.ndarray | None = None
    infeasible_cells: np.ndarray | None = None


def _ratio(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    out = np.ones_like(q)
    nz = p != 0
    out[nz] = np.clip(q[nz] / p[nz], 0.0, 1.0)
    return out


def compute_bound_limiters(fluxes: InterfaceFluxSet, y: CellField, dx: float, dt: float) -> ApproxWorkspace:
    rows = build_bound_rows(fluxes, y, dx, dt)
    had = fluxes.h_ad
    # cell i sees -hAD_{i+1/2} on its right face and +hAD_{i-1/2} on its left
    right_term = -had[1:]
    left_term = had[:-1]
    P_plus = np.maximum(0.0, right_term) + np.maximum(0.0, left_term)
    P_minus = np.minimum(0.0, right_term) + np.minimum(0.0, left_term)
    R_plus = _ratio(rows.upper, P_plus)
    R_minus = _ratio(rows.lower, P_minus)

    alpha_bar = np.ones_like(had)
    k = np.arange(1, had.size - 1)
    neg = had[k] < 0
    pos = had[k] > 0
    alpha_bar[k[neg]] = np.minimum(R_plus[k[neg] - 1], R_minus[k[neg]])
    alpha_bar[k[pos]] = np.minimum(R_minus[k[pos] - 1], R_plus[k[pos]])
    alpha_bar[0] = alpha_bar[-1] = 0.0
    return ApproxWorkspace(rows.upper, rows.lower, P_plus, P_minus, R_plus, R_minus, alpha_bar)


def compute_entropy_limiters(
    fluxes: InterfaceFluxSet,
    y: CellField,
    y_hat: np.ndarray,
    entropy: EntropyPair,
    b: np.ndarray | None,
    dx: float,
    dt: float,
) -> tuple[np.ndarray, dict]:
    """Largest per-interface limiters that keep each proper entropy row satisfied.

    Returns ``(alpha_tilde, parts)`` where ``parts`` holds ``W``, the row
    coefficients, ``Y`` and the indices of cells with ``W > 0``.
    """
    rows = build_entropy_rows(fluxes, y, y_hat, entropy, "proper", dx, dt, b)
    W, d_left, d_right = rows.lower, rows.coef_left, rows.coef_right
    Y = np.minimum(0.0, d_right) + np.minimum(0.0, d_left)
    bad = W > FEAS_TOL
    # rows that hold for every limiter in [0,1]^2 up to tolerance restrict nothing;
    # without this, round-off in W and d makes the limiters flicker between passes
    free = W <= Y + ROW_TOL
    Wc = np.minimum(W, 0.0)

    def cap(d: np.ndarray) -> np.ndarray:
        out = np.ones_like(d)
        neg = (d < 0) & ~free
        out[neg] = np.clip(Wc[neg] / Y[neg], 0.0, 1.0)
        out[bad] = 0.0
        return out

    # interface k is the right face of cell k-1 and the left face of cell k
    from_left_cell = cap(d_right)
    from_right_cell = cap(d_left)
    alpha_tilde = np.ones(W.size + 1)
    alpha_tilde[1:-1] = np.minimum(from_left_cell[:-1], from_right_cell[1:])
    alpha_tilde[0] = alpha_tilde[-1] = 0.0
    parts = {"W": W, "d_left": d_left, "d_right": d_right, "Y": Y, "infeasible_cells": np.flatnonzero(bad)}
    return alpha_tilde, parts


def approximate_limiters(
    fluxes: InterfaceFluxSet,
    y: CellField,
    y_hat: np.ndarray | None,
    entropy: EntropyPair,
    dx: float,
    dt: float,
    *,
    entropy_variant: str = "proper",
    b: np.ndarray | None = None,
) -> tuple[np.ndarray, ApproxWorkspace]:
    ws = compute_bound_limiters(fluxes, y, dx, dt)
    if entropy_variant == "none":
        return ws.alpha_bar, ApproxWorkspace(**{**ws.__dict__, "alpha": ws.alpha_bar})
    if entropy_variant != "proper":
        raise ValueError("closed-form limiters are defined for the proper entropy flux only")
    alpha_tilde, parts = compute_entropy_limiters(fluxes, y, y_hat, entropy, b, dx, dt)
    alpha = np.minimum(ws.alpha_bar, alpha_tilde)
    return alpha, ApproxWorkspace(**{**ws.__dict__, **parts, "alpha_tilde": alpha_tilde, "alpha": alpha})
