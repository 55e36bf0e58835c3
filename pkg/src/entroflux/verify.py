"""Randomised invariant suites behind ``entroflux verify``.

Each suite draws independent cases from a seeded generator and returns one
:class:`CheckResult` per case. Cases are independent, so they may run on a
thread pool (``ENTROFLUX_THREADS`` caps its size).
"""

from __future__ import annotations

import json
import os
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from entroflux.approx import approximate_limiters
from entroflux.config import variant_config
from entroflux.core import CellField, ProblemSpec, builtin_problem, with_resolution
from entroflux.fluxes import (
    assemble_interface_fluxes,
    godunov_entropy_flux,
    godunov_flux,
    rusanov_entropy_flux,
    rusanov_flux,
)
from entroflux.limiters import program_arrays
from entroflux.lp import FEAS_TOL, LinearProgram, from_dense, solve, solve_arrays, vertex_enumeration
from entroflux.rows import build_bound_rows, build_entropy_rows, hybrid_update, neighbour_extrema
from entroflux.timestepper import ENTROPY_TOL, check_time_step, step

SUITES = ("fluxes", "lp", "limiters", "conservation", "entropy")
DEFAULT_CASES = {"fluxes": 200, "lp": 200, "limiters": 100, "conservation": 50, "entropy": 100}

RANGES = {"nonconvex_quartic": (-2.0, 2.0), "buckley_leverett": (-3.0, 3.0), "linear_advection": (0.0, 1.0)}


@dataclass
class CheckResult:
    suite: str
    check: str
    case: int
    ok: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=float)


# {{{ random generators


def random_values(rng: np.random.Generator, n: int, lo: float, hi: float) -> np.ndarray:
    """Piecewise-constant jumps mixed with smooth stretches and noise."""
    kind = rng.integers(3)
    if kind == 0:
        return rng.uniform(lo, hi, n)
    if kind == 1:
        k = int(rng.integers(1, 4))
        cuts = np.sort(rng.choice(np.arange(1, n), size=min(k, n - 1), replace=False))
        levels = rng.uniform(lo, hi, cuts.size + 1)
        return levels[np.searchsorted(cuts, np.arange(n), side="right")]
    x = np.linspace(0.0, 1.0, n)
    u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.sin(2 * np.pi * (rng.uniform(0.5, 2.0) * x + rng.uniform()))
    return np.clip(u + rng.normal(0.0, 0.05 * (hi - lo), n), lo, hi)


def random_state(
    rng: np.random.Generator, problem: str | None = None, n_cells: int | None = None
) -> tuple[ProblemSpec, CellField, float]:
    """A random admissible ``(spec, y, dt)``: dt obeys both time-step restrictions."""
    if problem is None:
        problem = str(rng.choice(list(RANGES)))
    n = int(rng.integers(4, 17)) if n_cells is None else n_cells
    spec = with_resolution(builtin_problem(problem), n)
    lo, hi = RANGES[problem]
    v = random_values(rng, n, lo, hi)
    if spec.ghost == "periodic":
        y = CellField(v, "periodic")
    else:
        y = CellField(v, "frozen", float(v[0]), float(v[-1]))
    # both restrictions are linear in dt, so the ratio at dt = 1 gives the bound
    # and the step must be admissible for either low-order flux
    ratio = max(check_time_step(spec, y, 1.0, low_flux=lf).ratio for lf in ("rusanov", "godunov"))
    dt = float(rng.uniform(0.05, 0.999)) / ratio if ratio > 0 else spec.grid.dx
    return spec, y, dt


def random_lp(rng: np.random.Generator, n_max: int = 6, m_max: int = 8) -> tuple[LinearProgram, np.ndarray | None]:
    """Random box-[0,1] program with a planted feasible point.

    Some draws shift one row past the plant, so the program may be
    infeasible; the returned point is then ``None``.
    """
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(0, m_max + 1))
    A = rng.normal(size=(m, n)) * (rng.random((m, n)) < 0.6)
    x0 = rng.random(n)
    ax = A @ x0
    lo = ax - rng.exponential(size=m) * (rng.random(m) < 0.8)
    hi = ax + rng.exponential(size=m) * (rng.random(m) < 0.8)
    lo[rng.random(m) < 0.2] = -np.inf
    hi[rng.random(m) < 0.2] = np.inf
    plant: np.ndarray | None = x0
    if m and rng.random() < 0.15:
        i = int(rng.integers(m))
        lo[i] = ax[i] + rng.exponential() + 1.0
        hi[i] = max(hi[i], lo[i])
        plant = None
    c = rng.normal(size=n)
    return from_dense(c, A, lo, hi), plant


def _rows_violation(rowsets, alpha: np.ndarray) -> float:
    return max((float(np.max(rs.violation(alpha), initial=0.0)) for rs in rowsets if rs is not None), default=0.0)


# }}}


# {{{ suites


def _check_fluxes(case: int, rng: np.random.Generator) -> list[CheckResult]:
    problem = str(rng.choice(["nonconvex_quartic", "buckley_leverett"]))
    spec = builtin_problem(problem)
    flux, ent = spec.flux, spec.entropy
    lo, hi = RANGES[problem]
    u, a, b = rng.uniform(lo, hi, 3)
    out = []

    scale = 1.0 + abs(float(flux.f(u))) + abs(float(ent.F(u)))
    err = max(
        abs(float(rusanov_flux(flux, u, u)) - float(flux.f(u))),
        abs(float(godunov_flux(flux, u, u)) - float(flux.f(u))),
        abs(float(rusanov_entropy_flux(flux, ent, u, u)) - float(ent.F(u))),
        abs(float(godunov_entropy_flux(flux, ent, u, u)) - float(ent.F(u))),
    )
    out.append(CheckResult("fluxes", "consistency", case, err <= 1e-12 * scale, {"problem": problem, "u": u, "err": err}))

    # Godunov flux against a dense scan of f on the interval
    s = np.linspace(min(a, b), max(a, b), 4001)
    fs = flux.f(s)
    brute = float(fs.min() if a <= b else fs.max())
    g = float(godunov_flux(flux, a, b))
    gap = (brute - g) if a <= b else (g - brute)
    ok = -1e-12 <= gap <= 1e-5 * (1 + abs(brute))
    out.append(CheckResult("fluxes", "godunov_vs_scan", case, ok, {"problem": problem, "yl": a, "yr": b, "gap": gap}))

    # monotonicity of the Rusanov flux: non-decreasing in yl, non-increasing in yr
    eps = 1e-6
    d_left = float(rusanov_flux(flux, a + eps, b)) - float(rusanov_flux(flux, a, b))
    d_right = float(rusanov_flux(flux, a, b + eps)) - float(rusanov_flux(flux, a, b))
    tol = 1e-12 * (1 + abs(float(rusanov_flux(flux, a, b))))
    out.append(CheckResult("fluxes", "rusanov_monotone", case, d_left >= -tol and d_right <= tol,
                           {"problem": problem, "d_left": d_left, "d_right": d_right}))

    # proper entropy flux: dH/dy = U'(y) dh/dy at frozen dissipation
    coef = abs(float(rng.uniform(0.5, 3.0)))
    h = 1e-6

    def dd(fn: Callable, x: float) -> float:
        return (fn(x + h) - fn(x - h)) / (2 * h)

    dH_l = dd(lambda x: float(rusanov_entropy_flux(flux, ent, x, b, coef)), a)
    dh_l = dd(lambda x: float(rusanov_flux(flux, x, b, coef)), a)
    dH_r = dd(lambda x: float(rusanov_entropy_flux(flux, ent, a, x, coef)), b)
    dh_r = dd(lambda x: float(rusanov_flux(flux, a, x, coef)), b)
    e1 = abs(dH_l - float(ent.Uprime(a)) * dh_l)
    e2 = abs(dH_r - float(ent.Uprime(b)) * dh_r)
    sc = 1 + abs(dH_l) + abs(dH_r)
    out.append(CheckResult("fluxes", "proper_identity", case, max(e1, e2) <= 1e-6 * sc,
                           {"problem": problem, "err_left": e1, "err_right": e2}))
    return out


def _check_lp(case: int, rng: np.random.Generator) -> list[CheckResult]:
    lp, x0 = random_lp(rng)
    status, best = vertex_enumeration(lp)
    sol = solve(lp)
    detail = {"n": lp.n_vars, "m": len(lp.rows), "status": sol.status, "oracle": status}
    ok = sol.status == status
    if ok and status == "optimal":
        viol = lp.max_violation(sol.x)
        detail.update(objective=sol.objective_value, oracle_objective=best, violation=viol)
        ok = abs(sol.objective_value - best) <= 1e-8 and viol <= FEAS_TOL
        if x0 is not None:
            ok = ok and sol.objective_value >= float(lp.objective @ x0) - 1e-9
    return [CheckResult("lp", "oracle_equivalence", case, ok, detail)]


def _check_limiters(case: int, rng: np.random.Generator) -> list[CheckResult]:
    spec, y, dt = random_state(rng, str(rng.choice(["nonconvex_quartic", "buckley_leverett"])))
    cfg = variant_config(str(rng.choice(["RusanovLE2", "RusanovLE4"])))
    dx = spec.grid.dx
    fl = assemble_interface_fluxes(spec, y, cfg)
    zero = np.zeros(len(y) + 1)
    y_hat = hybrid_update(y, fl, zero, dx, dt)
    bounds = build_bound_rows(fl, y, dx, dt)
    ent = build_entropy_rows(fl, y, y_hat, spec.entropy, "proper", dx, dt)
    base = {"problem": spec.name, "variant": cfg.high_flux, "n": len(y), "dt": dt}
    out = []

    v0 = _rows_violation([bounds, ent], zero)
    out.append(CheckResult("limiters", "zero_feasible", case, v0 <= FEAS_TOL, {**base, "violation": v0}))

    a_apx, _ = approximate_limiters(fl, y, y_hat, spec.entropy, dx, dt)
    va = _rows_violation([bounds, ent], a_apx)
    c, A, rlo, rhi = program_arrays([bounds, ent], np.ones(len(y) + 1))
    sol = solve_arrays(c, A, rlo, rhi, np.zeros(c.size), np.ones(c.size))
    obj_apx = float(a_apx[1:-1].sum())
    ok = va <= FEAS_TOL and sol.status == "optimal" and sol.objective_value >= obj_apx - 1e-9
    out.append(CheckResult("limiters", "approx_feasible_dominated", case, ok,
                           {**base, "violation": va, "lp": sol.objective_value, "approx": obj_apx}))

    y_next, _ = step(spec, y, cfg, dt)
    ymin, ymax = neighbour_extrema(y)
    slack = float(min(np.min(y_next.values - ymin), np.min(ymax - y_next.values)))
    out.append(CheckResult("limiters", "local_bounds", case, slack >= -1e-9, {**base, "slack": slack}))
    return out


def _check_conservation(case: int, rng: np.random.Generator) -> list[CheckResult]:
    spec, y, dt = random_state(rng)
    name = str(rng.choice(["Godunov", "Rusanov", "RusanovLP2", "RusanovLE2", "RusanovAE2", "RusanovAE4"]))
    cfg = variant_config(name)
    if cfg.low_flux == "godunov" and spec.name == "linear_advection":
        cfg = variant_config("Rusanov")
    y_next, diag = step(spec, y, cfg, dt)
    dx = spec.grid.dx
    m0, m1 = dx * y.values.sum(), dx * y_next.values.sum()
    scale = max(dx * np.abs(y.values).sum(), abs(diag.boundary_flux), 1e-300)
    err = abs(m1 - m0 + diag.boundary_flux) / scale
    return [CheckResult("conservation", "mass_ledger", case, err <= 1e-12,
                        {"problem": spec.name, "variant": name, "error": err})]


def _check_entropy(case: int, rng: np.random.Generator) -> list[CheckResult]:
    spec, y, dt = random_state(rng, str(rng.choice(["nonconvex_quartic", "buckley_leverett"])))
    out = []
    for name in ("Godunov", "Rusanov"):
        y_next, diag = step(spec, y, variant_config(name), dt)
        r = float(np.max(diag.proper_residual))
        scale = 1.0 + float(np.max(np.abs(spec.entropy.U(y.values))))
        out.append(CheckResult("entropy", f"monotone_{name.lower()}", case, r <= 1e-12 * scale,
                               {"problem": spec.name, "n": len(y), "dt": dt, "max_residual": r}))
    y_next, diag = step(spec, y, variant_config("RusanovLE2"), dt)
    r = float(np.max(diag.proper_residual))
    ok = (not diag.converged) or r <= ENTROPY_TOL
    out.append(CheckResult("entropy", "constrained_le2", case, ok,
                           {"problem": spec.name, "converged": diag.converged, "max_residual": r}))
    return out


_SUITE_FNS: dict[str, Callable[[int, np.random.Generator], list[CheckResult]]] = {
    "fluxes": _check_fluxes,
    "lp": _check_lp,
    "limiters": _check_limiters,
    "conservation": _check_conservation,
    "entropy": _check_entropy,
}


# }}}


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("ENTROFLUX_THREADS", "1")))
    except ValueError:
        return 1


def run_suite(name: str, seed: int = 0, cases: int | None = None, threads: int | None = None) -> list[CheckResult]:
    if name not in _SUITE_FNS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    n = DEFAULT_CASES[name] if cases is None else cases
    seeds = np.random.SeedSequence(seed).spawn(n)
    fn = _SUITE_FNS[name]

    def one(k: int) -> list[CheckResult]:
        rng = np.random.default_rng(seeds[k])
        try:
            return fn(k, rng)
        except Exception as exc:  # a crash is a failed case, not a crashed suite
            return [CheckResult(name, "exception", k, False, {"error": f"{type(exc).__name__}: {exc}"})]

    threads = thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(one, range(n)))
    else:
        chunks = [one(k) for k in range(n)]
    return [r for chunk in chunks for r in chunk]


def write_report(results: Iterable[CheckResult], fh) -> bool:
    """JSON lines, one per check, then a summary line; returns overall pass."""
    results = list(results)
    for r in results:
        fh.write(r.to_json() + "\n")
    failed = sum(not r.ok for r in results)
    fh.write(json.dumps({"summary": True, "checks": len(results), "failed": failed, "ok": failed == 0}) + "\n")
    return failed == 0


__all__ = ["CheckResult", "SUITES", "random_lp", "random_state", "random_values", "run_suite", "write_report"]
