"""Forward-Euler hybrid scheme, time-step restrictions and entropy diagnostics."""

from __future__ import annotations

import logging
import time as _time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from entroflux.config import SchemeConfig
from entroflux.core import CellField, ProblemSpec, max_Udoubleprime_on_interval
from entroflux.fluxes import InterfaceFluxSet, assemble_interface_fluxes, tadmor_entropy_flux
from entroflux.limiters import LimiterError, solve_step_limiters
from entroflux.rows import hybrid_update, neighbour_extrema

logger = logging.getLogger(__name__)

ENTROPY_TOL = 1e-8


class TimeStepError(RuntimeError):
    pass


# {{{ time-step restrictions


@dataclass(frozen=True)
class TimeStepReport:
    ok: bool
    ratio: float
    monotone_ratio: float
    entropy_ratio: float
    worst_cell: int
    condition: str

    def __bool__(self) -> bool:
        return self.ok


def _monotone_coefficients(spec: ProblemSpec, y: CellField, fluxes: InterfaceFluxSet, low_flux: str) -> np.ndarray:
    """Per-cell divided-difference form of ``dh_{i+1/2}/dy_i - dh_{i-1/2}/dy_i``.

    Writing the update as ``y_i + lam D-_{i+1/2} (y_{i+1} - y_i) - lam D+_{i-1/2} (y_i - y_{i-1})``
    with ``D- = (f(y_l) - h)/(y_r - y_l)`` and ``D+ = (f(y_r) - h)/(y_r - y_l)``
    makes ``lam (D-_{i+1/2} + D+_{i-1/2}) <= 1`` exactly the condition for a
    convex combination of neighbours. Across a vanishing jump the quotients
    tend to the one-sided derivatives of the flux.
    """
    f = spec.flux
    yl, yr, h = fluxes.y_left, fluxes.y_right, fluxes.h_low
    d = yr - yl
    small = np.abs(d) <= 1e-7 * (1.0 + np.abs(yl) + np.abs(yr))
    safe = np.where(small, 1.0, d)
    d_minus = (f.f(yl) - h) / safe
    d_plus = (f.f(yr) - h) / safe
    mid = 0.5 * (yl + yr)
    fp = f.fprime(mid)
    if low_flux == "rusanov":
        lim_minus, lim_plus = 0.5 * (fluxes.coef - fp), 0.5 * (fluxes.coef + fp)
    else:
        lim_minus, lim_plus = np.maximum(0.0, -fp), np.maximum(0.0, fp)
    d_minus = np.where(small, lim_minus, d_minus)
    d_plus = np.where(small, lim_plus, d_plus)
    # cell i: right face is interface i+1, left face is interface i
    return np.maximum(d_minus[1:], 0.0) + np.maximum(d_plus[:-1], 0.0)


def check_time_step(
    spec: ProblemSpec,
    y: CellField,
    dt: float,
    low_flux: str = "rusanov",
    fluxes: InterfaceFluxSet | None = None,
) -> TimeStepReport:
    """Check the monotone CFL bound and the entropy bound of the low-order scheme.

    Returns the most binding ratio (<= 1 means satisfied).
    """
    if dt == 0:
        return TimeStepReport(True, 0.0, 0.0, 0.0, -1, "none")
    dx = spec.grid.dx
    if fluxes is None:
        fluxes = assemble_interface_fluxes(spec, y, SchemeConfig(low_flux=low_flux))  # type: ignore[arg-type]
    mono = dt * _monotone_coefficients(spec, y, fluxes, low_flux) / dx

    ymin, ymax = neighbour_extrema(y)
    dh = fluxes.h_low[1:] - fluxes.h_low[:-1]
    dH = fluxes.H_low[1:] - fluxes.H_low[:-1]
    lhs = dt * max_Udoubleprime_on_interval(spec.entropy, ymin, ymax) * dh**2
    rhs = 2.0 * dx * (spec.entropy.Uprime(y.values) * dh - dH)
    # round-off floor of the right-hand side: it is a difference of O(|h|, |H|) terms
    hL, HL = np.abs(fluxes.h_low), np.abs(fluxes.H_low)
    v = np.abs(spec.entropy.Uprime(y.values))
    tiny = 1e-13 * dx * (v * (hL[1:] + hL[:-1]) + HL[1:] + HL[:-1]) + 1e-300
    ent = np.where(lhs <= tiny, 0.0, lhs / np.maximum(rhs, tiny))

    i_m, i_e = int(np.argmax(mono)), int(np.argmax(ent))
    m_ratio, e_ratio = float(mono[i_m]), float(ent[i_e])
    if m_ratio >= e_ratio:
        ratio, cell, cond = m_ratio, i_m, "monotone"
    else:
        ratio, cell, cond = e_ratio, i_e, "entropy"
    return TimeStepReport(ratio <= 1.0 + 1e-12, ratio, m_ratio, e_ratio, cell, cond)


# }}}


# {{{ single step


@dataclass
class StepDiagnostics:
    alpha: np.ndarray
    proper_residual: np.ndarray
    tadmor_residual: np.ndarray
    bound_slack: float
    mass_change: float
    boundary_flux: float
    outer_iterations: int = 0
    converged: bool = True
    fallback: bool = False


def entropy_residual(
    spec: ProblemSpec,
    y: CellField,
    y_next: np.ndarray,
    alpha: np.ndarray,
    fluxes: InterfaceFluxSet,
    variant: Literal["proper", "tadmor"],
    dt: float,
) -> np.ndarray:
    """``U(y_next) - U(y) + dt/dx (H_{i+1/2} - H_{i-1/2})``; <= 0 is entropy stable."""
    ent = spec.entropy
    if variant == "proper":
        _, H = fluxes.hybrid(alpha)
    elif variant == "tadmor":
        h, _ = fluxes.hybrid(alpha)
        H = tadmor_entropy_flux(ent, h, fluxes.y_left, fluxes.y_right)
    else:
        raise ValueError(f"unknown entropy flux {variant!r}")
    return ent.U(np.asarray(y_next)) - ent.U(y.values) + dt / spec.grid.dx * (H[1:] - H[:-1])


def _limiters(spec: ProblemSpec, y: CellField, config: SchemeConfig, dt: float, fluxes: InterfaceFluxSet):
    n_iface = len(y) + 1
    if config.high_flux == "none" or config.limiter == "none":
        return np.zeros(n_iface), None
    if config.limiter == "unlimited":
        alpha = np.ones(n_iface)
        alpha[0] = alpha[-1] = 0.0
        return alpha, None
    res = solve_step_limiters(spec, y, config, dt, fluxes)
    return res.alpha, res


def step(spec: ProblemSpec, y: CellField, config: SchemeConfig, dt: float) -> tuple[CellField, StepDiagnostics]:
    fluxes = assemble_interface_fluxes(spec, y, config)
    alpha, res = _limiters(spec, y, config, dt, fluxes)
    dx = spec.grid.dx
    y_next = res.y_next if res is not None else hybrid_update(y, fluxes, alpha, dx, dt)
    if not np.all(np.isfinite(y_next)):
        bad = int(np.flatnonzero(~np.isfinite(y_next))[0])
        raise FloatingPointError(f"non-finite value produced in cell {bad}")

    ymin, ymax = neighbour_extrema(y)
    slack = float(min(np.min(y_next - ymin), np.min(ymax - y_next)))
    h, _ = fluxes.hybrid(alpha)
    diag = StepDiagnostics(
        alpha=alpha,
        proper_residual=entropy_residual(spec, y, y_next, alpha, fluxes, "proper", dt),
        tadmor_residual=entropy_residual(spec, y, y_next, alpha, fluxes, "tadmor", dt),
        bound_slack=slack,
        mass_change=float(dx * (np.sum(y_next) - np.sum(y.values))),
        boundary_flux=float(dt * (h[-1] - h[0])),
    )
    if res is not None:
        diag.outer_iterations = res.outer_iterations
        diag.converged = res.converged
        diag.fallback = res.fallback
    return y.with_values(y_next), diag


# }}}


# {{{ simulation driver


@dataclass
class SolutionTrace:
    """Snapshots plus per-step diagnostics of one run."""

    x: np.ndarray
    snapshots: list[tuple[float, np.ndarray]] = field(default_factory=list)
    residuals: list[tuple[float, np.ndarray, np.ndarray]] = field(default_factory=list)
    step_times: list[float] = field(default_factory=list)
    step_dt: list[float] = field(default_factory=list)
    limiter_history: list[np.ndarray] = field(default_factory=list)
    step_converged: list[bool] = field(default_factory=list)
    max_proper_residual: list[float] = field(default_factory=list)
    max_tadmor_residual: list[float] = field(default_factory=list)
    mass: list[float] = field(default_factory=list)
    boundary_flux_integral: list[float] = field(default_factory=list)
    ledger_error: list[float] = field(default_factory=list)
    non_converged_steps: int = 0
    fallback_steps: int = 0
    max_outer_iterations: int = 0
    metadata: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1][1]

    @property
    def n_steps(self) -> int:
        return len(self.step_dt)

    def max_ledger_error(self) -> float:
        return max(self.ledger_error, default=0.0)


def stable_dt(spec: ProblemSpec, y: CellField, courant: float) -> float:
    lo, hi = float(np.min(y.padded())), float(np.max(y.padded()))
    from entroflux.core import max_abs_fprime_on_interval

    a = max_abs_fprime_on_interval(spec.flux, lo, hi)
    return courant * spec.grid.dx / max(a, 1e-300)


def run_simulation(
    spec: ProblemSpec,
    config: SchemeConfig,
    dt_policy: Literal["fixed", "adaptive"] | None = None,
    snapshot_times: list[float] | None = None,
    *,
    dt: float | None = None,
    courant: float | None = None,
    safety: float = 0.9,
    raise_on_error: bool = True,
) -> SolutionTrace:
    """Integrate from t=0 to ``spec.end_time``.

    ``fixed`` uses ``dt`` (or the problem's own step) verbatim and refuses to
    start if it violates the time-step restrictions; ``adaptive`` picks
    ``courant * dx / max|f'|`` and shrinks it by ``safety`` until the
    restrictions hold. Steps are shortened to land exactly on snapshot times.
    """
    if dt_policy is None:
        dt_policy = "fixed" if (dt or spec.dt) else "adaptive"
    if dt_policy == "fixed":
        dt = dt or spec.dt
        if not dt:
            raise ValueError("fixed time stepping needs a dt")
    courant = spec.courant if courant is None else courant
    T = spec.end_time
    times = sorted({float(t) for t in (snapshot_times or []) if 0 < t < T} | {T})

    y = spec.initial_field()
    trace = SolutionTrace(x=spec.grid.centers, snapshots=[(0.0, y.values.copy())])
    trace.metadata.update(problem=spec.name, dt_policy=dt_policy, n_cells=spec.grid.n_cells, dx=spec.grid.dx)
    dx = spec.grid.dx
    mass = float(dx * np.sum(y.values))
    trace.mass.append(mass)
    flux_integral = 0.0

    t = 0.0
    k_snap = 0
    started = _time.perf_counter()
    dts: list[float] = []
    while k_snap < len(times):
        target = times[k_snap]
        if dt_policy == "fixed":
            dt_k = float(dt)
        else:
            dt_k = stable_dt(spec, y, courant)
        remaining = target - t
        if dt_k >= remaining - 1e-9 * dt_k:
            dt_k = remaining
        report = check_time_step(spec, y, dt_k, config.low_flux)
        if not report.ok:
            if dt_policy == "fixed":
                msg = (f"time step {dt_k} violates the {report.condition} restriction at t={t} "
                       f"(ratio {report.ratio:.4g}, cell {report.worst_cell})")
                if raise_on_error:
                    raise TimeStepError(msg)
                trace.error = msg
                break
            while not report.ok:
                dt_k *= safety
                report = check_time_step(spec, y, dt_k, config.low_flux)

        try:
            y_new, diag = step(spec, y, config, dt_k)
        except (LimiterError, FloatingPointError) as exc:
            if raise_on_error:
                raise
            trace.error = f"{type(exc).__name__}: {exc}"
            logger.error("run aborted at t=%g: %s", t, exc)
            break

        landed = dt_k == remaining
        t = target if landed else t + dt_k
        dts.append(dt_k)
        trace.step_times.append(t)
        trace.step_dt.append(dt_k)
        trace.limiter_history.append(diag.alpha)
        trace.max_proper_residual.append(float(np.max(diag.proper_residual)))
        trace.max_tadmor_residual.append(float(np.max(diag.tadmor_residual)))
        trace.max_outer_iterations = max(trace.max_outer_iterations, diag.outer_iterations)
        trace.step_converged.append(diag.converged)
        trace.non_converged_steps += int(not diag.converged)
        trace.fallback_steps += int(diag.fallback)

        new_mass = float(dx * np.sum(y_new.values))
        flux_integral += diag.boundary_flux
        scale = max(abs(mass), float(dx * np.sum(np.abs(y.values))), abs(diag.boundary_flux), 1e-300)
        trace.ledger_error.append(abs(new_mass - mass + diag.boundary_flux) / scale)
        trace.mass.append(new_mass)
        trace.boundary_flux_integral.append(flux_integral)
        mass = new_mass
        y = y_new

        if landed:
            trace.snapshots.append((t, y.values.copy()))
            trace.residuals.append((t, diag.proper_residual.copy(), diag.tadmor_residual.copy()))
            k_snap += 1

    trace.metadata["runtime_s"] = _time.perf_counter() - started
    if dts:
        trace.metadata["dt_min"] = min(dts)
        trace.metadata["dt_max"] = max(dts)
    return trace


def l1_distance(u: np.ndarray, v: np.ndarray, dx: float) -> float:
    return float(dx * np.sum(np.abs(np.asarray(u) - np.asarray(v))))


def restrict(fine: np.ndarray, factor: int) -> np.ndarray:
    """Cell averages of a fine-grid field on a grid ``factor`` times coarser."""
    fine = np.asarray(fine)
    if fine.size % factor:
        raise ValueError("fine grid size must be a multiple of the coarsening factor")
    return fine.reshape(-1, factor).mean(axis=1)

