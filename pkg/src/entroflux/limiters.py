"""Per-step limiter optimisation: the LP assembly and the predictor fixed-point loop."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np

from entroflux.approx import approximate_limiters
from entroflux.config import SchemeConfig
from entroflux.core import CellField, ProblemSpec
from entroflux.fluxes import InterfaceFluxSet, assemble_interface_fluxes
from entroflux.lp import LinearProgram, LpSolution, from_dense, solve_arrays
from entroflux.rows import RowSet, build_bound_rows, build_entropy_rows, default_multipliers, hybrid_update

logger = logging.getLogger(__name__)


class LimiterError(RuntimeError):
    """The limiter program was infeasible where feasibility is guaranteed."""


@dataclass
class LimiterResult:
    alpha: np.ndarray
    y_next: np.ndarray
    outer_iterations: int
    converged: bool
    objective_value: float
    fallback: bool = False
    infeasible_cells: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


def program_arrays(rowsets: list[RowSet], c: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Dense ``(objective, A, lower, upper)`` over the interior interfaces ``1..n-1``.

    Boundary limiters are fixed at 0, so cell ``i`` touches variable ``i-1``
    (its left face) and variable ``i`` (its right face) when those exist.
    """
    nv = c.size - 2
    blocks = []
    for rs in rowsets:
        ncell = len(rs)
        A = np.zeros((ncell, nv))
        i = np.arange(1, ncell)
        A[i[i - 1 < nv], (i - 1)[i - 1 < nv]] = rs.coef_left[1:][i - 1 < nv]
        k = np.arange(min(ncell, nv))
        A[k, k] = rs.coef_right[: k.size]
        blocks.append((A, rs.lower, rs.upper))
    A = np.vstack([b[0] for b in blocks]) if blocks else np.zeros((0, nv))
    lo = np.concatenate([b[1] for b in blocks]) if blocks else np.zeros(0)
    hi = np.concatenate([b[2] for b in blocks]) if blocks else np.zeros(0)
    return c[1:-1].astype(float), A, lo, hi


def build_program(rowsets: list[RowSet], c: np.ndarray) -> LinearProgram:
    """The limiter LP as a :class:`LinearProgram` (used for dumps and tests)."""
    return from_dense(*program_arrays(rowsets, c))


def _dump(path: str, p: int, lp: LinearProgram, sol: LpSolution | None) -> None:
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, f"iter{p:03d}.lp"), "w") as fh:
        fh.write(lp.to_text())
        if sol is not None:
            fh.write(f"\\ status={sol.status} objective={sol.objective_value!r}\n")
            fh.write("\\ x=" + " ".join(repr(float(v)) for v in sol.x) + "\n")


def solve_step_limiters(
    spec: ProblemSpec,
    y: CellField,
    config: SchemeConfig,
    dt: float,
    fluxes: InterfaceFluxSet | None = None,
) -> LimiterResult:
    """Maximal limiters for one step via the predictor loop.

    Each outer pass builds the bound rows and the entropy rows linearised at
    the current predictor, finds limiters (exactly by LP or by the closed-form
    rule), and re-evaluates the predictor; the loop stops once both the
    predictor and the limiters stop moving.
    """
    it = config.iteration
    dx = spec.grid.dx
    if fluxes is None:
        fluxes = assemble_interface_fluxes(spec, y, config)
    n_iface = len(y) + 1
    c = np.ones(n_iface) if it.c_weights is None else np.asarray(it.c_weights, dtype=float)
    b = default_multipliers(spec.entropy, y) if it.b_multipliers is None else np.asarray(it.b_multipliers, dtype=float)
    variant = config.entropy_variant

    alpha = np.zeros(n_iface)
    y_hat = y.values.copy() if it.init_from_old_state else hybrid_update(y, fluxes, alpha, dx, dt)
    bounds = build_bound_rows(fluxes, y, dx, dt)
    objective = 0.0
    infeasible_cells = np.zeros(0, dtype=int)

    warm = None
    for p in range(it.max_outer_iterations):
        if config.limiter == "exact_lp":
            ent = build_entropy_rows(fluxes, y, y_hat, spec.entropy, variant, dx, dt, b)
            cc, A, rlo, rhi = program_arrays([bounds] if ent is None else [bounds, ent], c)
            nv = cc.size
            # the matrix is the same on every pass; only entropy-row bounds move
            sol = solve_arrays(cc, A, rlo, rhi, np.zeros(nv), np.ones(nv), warm=warm)
            warm = sol.basis_state
            if it.debug_dump:
                _dump(it.debug_dump, p, from_dense(cc, A, rlo, rhi), sol)
            if sol.status == "infeasible" and p == 0 and variant != "tadmor" and not it.init_from_old_state:
                # proper-flux rows built at the monotone predictor always admit alpha = 0
                path = it.debug_dump or "."
                if not it.debug_dump:
                    _dump(os.path.join(path, "limiter_failure"), p, from_dense(cc, A, rlo, rhi), sol)
                raise LimiterError(f"limiter LP infeasible at outer iteration {p}; program dumped under {path!r}")
            if sol.status != "optimal":
                # a later predictor (or Tadmor rows) can leave no feasible limiters; the monotone step is always safe
                logger.warning("limiter LP %s at outer iteration %d; falling back to the monotone step", sol.status, p)
                zero = np.zeros(n_iface)
                return LimiterResult(zero, hybrid_update(y, fluxes, zero, dx, dt), p + 1, False, 0.0, fallback=True)
            alpha_new = np.zeros(n_iface)
            alpha_new[1:-1] = sol.x
            objective = sol.objective_value
        else:
            alpha_new, ws = approximate_limiters(fluxes, y, y_hat, spec.entropy, dx, dt, entropy_variant=variant, b=b)
            objective = float(c[1:-1] @ alpha_new[1:-1])
            if ws.infeasible_cells is not None:
                infeasible_cells = ws.infeasible_cells

        y_new = hybrid_update(y, fluxes, alpha_new, dx, dt)
        dy = np.abs(y_new - y_hat) / np.maximum(it.delta, np.abs(y_new))
        done = bool(np.all(dy < it.eps1) and np.all(np.abs(alpha_new - alpha) < it.eps2))
        alpha, y_hat = alpha_new, y_new
        # without entropy rows nothing depends on the predictor
        if done or variant == "none":
            return LimiterResult(alpha, y_hat, p + 1, True, objective, infeasible_cells=infeasible_cells)

    return LimiterResult(alpha, y_hat, it.max_outer_iterations, False, objective, infeasible_cells=infeasible_cells)
