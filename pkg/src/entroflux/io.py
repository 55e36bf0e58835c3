"""CSV artifacts of a run and the comparison of two runs.

Every float is written with 17 significant digits, which round-trips binary64
exactly.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from entroflux.timestepper import SolutionTrace

FMT = "%.17g"

SOLUTION = "solution.csv"
RESIDUALS = "residuals.csv"
LIMITERS = "limiters.csv"
METRICS = "metrics.csv"
ERROR = "error.txt"


class GridMismatchError(ValueError):
    pass


def _fmt(v: float) -> str:
    return FMT % v


# {{{ writers


def write_solution(path: str, trace: SolutionTrace) -> None:
    """Wide table: ``x`` then one ``u@t=<time>`` column per snapshot."""
    header = ["x"] + [f"u@t={_fmt(t)}" for t, _ in trace.snapshots]
    cols = [trace.x] + [u for _, u in trace.snapshots]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])


def read_solution(path: str) -> tuple[np.ndarray, list[float], np.ndarray]:
    """Returns ``(x, times, U)`` with ``U[k]`` the snapshot at ``times[k]``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[0] != "x" or not all(h.startswith("u@t=") for h in header[1:]):
        raise ValueError(f"{path}: not a solution table")
    times = [float(h[4:]) for h in header[1:]]
    data = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(len(body), len(header))
    return data[:, 0].copy(), times, data[:, 1:].T.copy()


def write_residuals(path: str, trace: SolutionTrace) -> None:
    """Long table ``time,x,proper,tadmor``; one block per snapshot (t > 0)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "x", "proper", "tadmor"])
        for t, prop, tad in trace.residuals:
            for x, p, q in zip(trace.x, prop, tad):
                w.writerow([_fmt(t), _fmt(x), _fmt(p), _fmt(q)])


def write_limiters(path: str, trace: SolutionTrace, x_interfaces: np.ndarray) -> None:
    """Long table ``step,time,x,alpha`` over every step and interface."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "time", "x", "alpha"])
        for k, (t, alpha) in enumerate(zip(trace.step_times, trace.limiter_history)):
            for x, a in zip(x_interfaces, alpha):
                w.writerow([k, _fmt(t), _fmt(x), _fmt(a)])


def trace_metrics(trace: SolutionTrace) -> dict[str, object]:
    mass0 = trace.mass[0] if trace.mass else 0.0
    drift = (trace.mass[-1] - mass0 + trace.boundary_flux_integral[-1]) if trace.boundary_flux_integral else 0.0
    alphas = np.concatenate([a[1:-1] for a in trace.limiter_history]) if trace.limiter_history else np.zeros(0)
    out: dict[str, object] = dict(trace.metadata)
    out.update(
        steps=trace.n_steps,
        final_time=trace.snapshots[-1][0] if trace.snapshots else 0.0,
        initial_mass=mass0,
        final_mass=trace.mass[-1] if trace.mass else 0.0,
        mass_drift=drift,
        max_ledger_error=trace.max_ledger_error(),
        max_proper_residual=max(trace.max_proper_residual, default=0.0),
        max_tadmor_residual=max(trace.max_tadmor_residual, default=0.0),
        limiter_mean=float(alphas.mean()) if alphas.size else math.nan,
        limiter_min=float(alphas.min()) if alphas.size else math.nan,
        max_outer_iterations=trace.max_outer_iterations,
        non_converged_steps=trace.non_converged_steps,
        fallback_steps=trace.fallback_steps,
        error=trace.error or "",
    )
    return out


def write_metrics(path: str, metrics: dict[str, object]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["key", "value"])
        for k, v in metrics.items():
            w.writerow([k, _fmt(v) if isinstance(v, float) else v])


def read_metrics(path: str) -> dict[str, str]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return {k: v for k, v in rows[1:]}


def write_run(out_dir: str, trace: SolutionTrace, x_interfaces: np.ndarray) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_solution(os.path.join(out_dir, SOLUTION), trace)
    write_residuals(os.path.join(out_dir, RESIDUALS), trace)
    write_limiters(os.path.join(out_dir, LIMITERS), trace, x_interfaces)
    write_metrics(os.path.join(out_dir, METRICS), trace_metrics(trace))
    err = os.path.join(out_dir, ERROR)
    if trace.error:
        with open(err, "w") as fh:
            fh.write(trace.error + "\n")
    elif os.path.exists(err):
        os.remove(err)


# }}}


# {{{ comparison


@dataclass(frozen=True)
class ComparisonReport:
    time: float
    l1: float
    l2: float
    linf: float
    max_proper_residual_a: float
    max_proper_residual_b: float
    max_tadmor_residual_a: float
    max_tadmor_residual_b: float
    limiter_mean_a: float
    limiter_mean_b: float
    limiter_min_a: float
    limiter_min_b: float


def snapshot_distances(u: np.ndarray, v: np.ndarray, dx: float) -> tuple[float, float, float]:
    d = np.abs(np.asarray(u, dtype=float) - np.asarray(v, dtype=float))
    return float(dx * d.sum()), float(math.sqrt(dx * float(np.sum(d * d)))), float(d.max(initial=0.0))


def _num(metrics: dict[str, str], key: str) -> float:
    try:
        return float(metrics[key])
    except (KeyError, ValueError):
        return math.nan


def compare_runs(dir_a: str, dir_b: str) -> list[ComparisonReport]:
    """One report per snapshot time present in both runs (t=0 excluded)."""
    xa, ta, ua = read_solution(os.path.join(dir_a, SOLUTION))
    xb, tb, ub = read_solution(os.path.join(dir_b, SOLUTION))
    if xa.shape != xb.shape or not np.allclose(xa, xb, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(xa).max(initial=0)))):
        raise GridMismatchError(f"grids differ: {xa.size} vs {xb.size} cells")
    common = [t for t in ta if t > 0 and any(abs(t - s) <= 1e-12 * max(1.0, abs(t)) for s in tb)]
    if not common:
        raise GridMismatchError("the runs share no snapshot time")
    ma, mb = read_metrics(os.path.join(dir_a, METRICS)), read_metrics(os.path.join(dir_b, METRICS))
    dx = float(xa[1] - xa[0]) if xa.size > 1 else 1.0
    out = []
    for t in common:
        ka = ta.index(t)
        kb = min(range(len(tb)), key=lambda k: abs(tb[k] - t))
        l1, l2, linf = snapshot_distances(ua[ka], ub[kb], dx)
        out.append(ComparisonReport(
            t, l1, l2, linf,
            _num(ma, "max_proper_residual"), _num(mb, "max_proper_residual"),
            _num(ma, "max_tadmor_residual"), _num(mb, "max_tadmor_residual"),
            _num(ma, "limiter_mean"), _num(mb, "limiter_mean"),
            _num(ma, "limiter_min"), _num(mb, "limiter_min"),
        ))
    return out


def write_comparison(path: str, reports: list[ComparisonReport]) -> None:
    fields = list(asdict(reports[0]).keys())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(fields)
        for r in reports:
            w.writerow([_fmt(v) for v in asdict(r).values()])


# }}}
