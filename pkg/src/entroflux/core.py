"""Continuous problem data, grids and interval extrema.

The flux and entropy callables are expected to be vectorised over numpy arrays.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate

Array = np.ndarray
ScalarFn = Callable[[Array], Array]

N_SAMPLES = 1024
GOLDEN_RTOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


# {{{ interval extrema


def _check_finite(*values: float) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite interval endpoint: {v!r}")


def _golden_max(g: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    gc, gd = g(c), g(d)
    tol = GOLDEN_RTOL * max(1.0, abs(a), abs(b))
    while abs(b - a) > tol:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - _INVPHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _INVPHI * (b - a)
            gd = g(d)
    s = 0.5 * (a + b)
    return g(s), s


def maximize_on_interval(
    g: ScalarFn,
    a: float,
    b: float,
    critical_points: Sequence[float] | None = None,
) -> tuple[float, float]:
    """Global maximum of ``g`` on ``[min(a, b), max(a, b)]``.

    Returns ``(value, argmax)``. With ``critical_points`` the candidates are the
    endpoints plus the critical points inside the interval, which is exact.
    Otherwise ``g`` is sampled densely and the best sample is refined by
    golden-section search on its neighbouring bracket.
    """
    _check_finite(a, b)
    lo, hi = (a, b) if a <= b else (b, a)
    if lo == hi:
        return float(g(np.asarray(lo))), float(lo)

    if critical_points is not None:
        cand = np.concatenate([[lo, hi], np.clip(np.asarray(critical_points, float), lo, hi)])
        vals = np.asarray(g(cand), dtype=float)
        k = int(np.argmax(vals))
        return float(vals[k]), float(cand[k])

    s = np.linspace(lo, hi, N_SAMPLES + 1)
    vals = np.asarray(g(s), dtype=float)
    k = int(np.argmax(vals))
    best_v, best_s = float(vals[k]), float(s[k])
    left, right = s[max(k - 1, 0)], s[min(k + 1, N_SAMPLES)]
    if right > left:
        gv, gs = _golden_max(lambda t: float(g(np.asarray(t))), left, right)
        if gv > best_v:
            best_v, best_s = gv, gs
    return best_v, best_s


def _vector_extremum(
    g: ScalarFn,
    a: Array,
    b: Array,
    critical_points: Sequence[float] | None,
    mode: Literal["min", "max"],
) -> tuple[Array, Array]:
    """Elementwise extremum of ``g`` over the intervals spanned by ``a`` and ``b``."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    _check_finite(a, b)
    sign = 1.0 if mode == "max" else -1.0
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)

    if critical_points is not None:
        crit = np.asarray(critical_points, dtype=float).reshape(-1, 1)
        # clipping a critical point into [lo, hi] yields either itself or an endpoint
        cand = np.vstack([lo, hi, np.clip(crit, lo, hi)])
        vals = sign * np.asarray(g(cand), dtype=float)
        k = np.argmax(vals, axis=0)[None]
        return sign * np.take_along_axis(vals, k, 0)[0], np.take_along_axis(cand, k, 0)[0]

    out_v = np.empty(lo.shape)
    out_s = np.empty(lo.shape)
    for j in range(lo.size):
        v, s = maximize_on_interval(lambda t: sign * g(t), float(lo[j]), float(hi[j]))
        out_v[j], out_s[j] = sign * v, s
    return out_v, out_s


# }}}


# {{{ problem data


@dataclass(frozen=True)
class FluxFunction:
    """Differential flux ``f`` with derivative ``fprime``.

    ``fprime_critical`` are the roots of f'' (candidate extrema of f') and
    ``f_critical`` the roots of f' (candidate extrema of f).
    """

    f: ScalarFn
    fprime: ScalarFn
    fprime_critical: tuple[float, ...] | None = None
    f_critical: tuple[float, ...] | None = None
    name: str = "flux"


@dataclass(frozen=True)
class EntropyPair:
    U: ScalarFn
    Uprime: ScalarFn
    Udoubleprime: ScalarFn
    F: ScalarFn
    psi: ScalarFn
    # roots of U''' when known, so that max U'' on an interval is exact
    Udoubleprime_critical: tuple[float, ...] | None = None

    def entropy_variable(self, u: Array) -> Array:
        return self.Uprime(u)


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self) -> None:
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n_cells < 3:
            raise ValueError("need at least 3 cells")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self) -> Array:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def interfaces(self) -> Array:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx


GhostPolicy = Literal["frozen", "periodic"]


@dataclass(frozen=True)
class CellField:
    """Cell values plus the rule that resolves out-of-range indices.

    ``frozen`` ghosts hold ``left``/``right`` for all time; ``periodic`` wraps.
    """

    values: Array
    ghost: GhostPolicy = "frozen"
    left: float = 0.0
    right: float = 0.0

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("cell values must be one-dimensional")
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise FloatingPointError(f"non-finite value in cell {bad}")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def padded(self, n_ghost: int = 2) -> Array:
        v = self.values
        if self.ghost == "periodic":
            return np.concatenate([v[-n_ghost:], v, v[:n_ghost]])
        return np.concatenate([np.full(n_ghost, self.left), v, np.full(n_ghost, self.right)])

    def with_values(self, values: Array) -> CellField:
        return CellField(values, self.ghost, self.left, self.right)


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    flux: FluxFunction
    entropy: EntropyPair
    grid: Grid1D
    initial_condition: Callable[[Array], Array]
    end_time: float
    left_state: float = 0.0
    right_state: float = 0.0
    ghost: GhostPolicy = "frozen"
    dt: float | None = None
    courant: float = 0.3
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.end_time > 0:
            raise ValueError("end_time must be positive")

    def initial_field(self) -> CellField:
        return CellField(
            self.initial_condition(self.grid.centers), self.ghost, self.left_state, self.right_state
        )


# }}}


# {{{ interval operations


def max_abs_fprime_on_interval(flux: FluxFunction, a, b):
    """max |f'(s)| over the closed interval spanned by ``a`` and ``b`` (elementwise)."""
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    v, _ = _vector_extremum(lambda s: np.abs(flux.fprime(s)), np.atleast_1d(a), np.atleast_1d(b), flux.fprime_critical, "max")
    return float(v[0]) if scalar else v


def extremum_f_on_interval(flux: FluxFunction, a, b, mode: Literal["min", "max"], *, return_arg: bool = False):
    """Global min or max of ``f`` over the interval spanned by ``a`` and ``b``."""
    if mode not in ("min", "max"):
        raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    v, s = _vector_extremum(flux.f, np.atleast_1d(a), np.atleast_1d(b), flux.f_critical, mode)
    if scalar:
        v, s = float(v[0]), float(s[0])
    return (v, s) if return_arg else v


def max_Udoubleprime_on_interval(entropy: EntropyPair, a, b):
    v, _ = _vector_extremum(entropy.Udoubleprime, np.atleast_1d(a), np.atleast_1d(b), entropy.Udoubleprime_critical, "max")
    return v


# }}}


# {{{ builtin problems


def _square_entropy(F: ScalarFn, psi: ScalarFn) -> EntropyPair:
    return EntropyPair(
        U=lambda u: 0.5 * np.asarray(u) ** 2,
        Uprime=lambda u: np.asarray(u, dtype=float),
        Udoubleprime=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        F=F,
        psi=psi,
        Udoubleprime_critical=(),
    )


def _riemann(ul: float, ur: float, x0: float, *, left_closed: bool) -> Callable[[Array], Array]:
    if left_closed:
        return lambda x: np.where(np.asarray(x) <= x0, ul, ur).astype(float)
    return lambda x: np.where(np.asarray(x) < x0, ul, ur).astype(float)


def _nonconvex_quartic() -> ProblemSpec:
    flux = FluxFunction(
        f=lambda u: 0.25 * (np.asarray(u) ** 2 - 1.0) * (np.asarray(u) ** 2 - 4.0),
        fprime=lambda u: np.asarray(u) ** 3 - 2.5 * np.asarray(u),
        fprime_critical=(-math.sqrt(5.0 / 6.0), math.sqrt(5.0 / 6.0)),
        f_critical=(-math.sqrt(2.5), 0.0, math.sqrt(2.5)),
        name="quartic",
    )
    entropy = _square_entropy(
        F=lambda u: (np.asarray(u) ** 2 / 5.0 - 5.0 / 6.0) * np.asarray(u) ** 3,
        psi=lambda u: np.asarray(u) ** 5 / 20.0 - 5.0 * np.asarray(u) ** 3 / 12.0 + np.asarray(u),
    )
    return ProblemSpec(
        name="nonconvex_quartic",
        flux=flux,
        entropy=entropy,
        grid=Grid1D(0.0, 2.0, 100),
        initial_condition=_riemann(2.0, -2.0, 1.0, left_closed=True),
        end_time=1.2,
        left_state=2.0,
        right_state=-2.0,
        dt=0.002,
    )


def _bl_denominator(u):
    u = np.asarray(u, dtype=float)
    return 5.0 * u**2 - 2.0 * u + 1.0


def _bl_entropy_flux(u):
    u = np.asarray(u, dtype=float)
    q = _bl_denominator(u)
    return -4.0 / 25.0 * ((u + 2.0) / q + np.log(q) - 1.5 * np.arctan((5.0 * u - 1.0) / 2.0))


def _buckley_leverett() -> ProblemSpec:
    def f(u):
        u = np.asarray(u, dtype=float)
        return 4.0 * u**2 / _bl_denominator(u)

    def fprime(u):
        u = np.asarray(u, dtype=float)
        return 8.0 * u * (1.0 - u) / _bl_denominator(u) ** 2

    # f'' vanishes at the real roots of 10u^3 - 15u^2 + 1
    inflections = tuple(sorted(float(r.real) for r in np.roots([10.0, -15.0, 0.0, 1.0]) if abs(r.imag) < 1e-12))
    flux = FluxFunction(f, fprime, fprime_critical=inflections, f_critical=(0.0, 1.0), name="buckley_leverett")
    entropy = _square_entropy(F=_bl_entropy_flux, psi=lambda u: np.asarray(u) * f(u) - _bl_entropy_flux(u))
    _validate_entropy_flux(flux, entropy, -3.0, 3.0)
    return ProblemSpec(
        name="buckley_leverett",
        flux=flux,
        entropy=entropy,
        grid=Grid1D(-0.5, 0.5, 80),
        initial_condition=_riemann(-3.0, 3.0, 0.0, left_closed=False),
        end_time=1.0,
        left_state=-3.0,
        right_state=3.0,
        dt=None,
        courant=0.3,
    )


def _linear_advection() -> ProblemSpec:
    flux = FluxFunction(
        f=lambda u: np.asarray(u, dtype=float),
        fprime=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        fprime_critical=(),
        f_critical=(),
        name="linear",
    )
    entropy = _square_entropy(F=lambda u: 0.5 * np.asarray(u) ** 2, psi=lambda u: 0.5 * np.asarray(u) ** 2)
    return ProblemSpec(
        name="linear_advection",
        flux=flux,
        entropy=entropy,
        grid=Grid1D(0.0, 1.0, 100),
        initial_condition=lambda x: np.where((np.asarray(x) > 0.25) & (np.asarray(x) < 0.5), 1.0, 0.0),
        end_time=1.0,
        ghost="periodic",
        dt=0.005,
    )


def _validate_entropy_flux(flux: FluxFunction, entropy: EntropyPair, lo: float, hi: float, tol: float = 1e-6) -> None:
    """Check F(u) - F(0) against the quadrature of U'(s) f'(s) from 0 to u."""
    for u in np.linspace(lo, hi, 13):
        ref, _ = integrate.quad(lambda s: float(entropy.Uprime(s) * flux.fprime(s)), 0.0, u, epsabs=1e-12)
        got = float(entropy.F(u) - entropy.F(0.0))
        if abs(got - ref) > tol:
            raise ValueError(f"entropy flux inconsistent with U'f' at u={u}: {got} vs {ref}")


BUILTIN_PROBLEMS: dict[str, Callable[[], ProblemSpec]] = {
    "nonconvex_quartic": _nonconvex_quartic,
    "buckley_leverett": _buckley_leverett,
    "linear_advection": _linear_advection,
}


def builtin_problem(name: str) -> ProblemSpec:
    try:
        return BUILTIN_PROBLEMS[name]()
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; valid names: {', '.join(BUILTIN_PROBLEMS)}") from None


def with_resolution(spec: ProblemSpec, n_cells: int, dt: float | None = None, end_time: float | None = None) -> ProblemSpec:
    from dataclasses import replace

    return replace(
        spec,
        grid=Grid1D(spec.grid.x_min, spec.grid.x_max, n_cells),
        dt=spec.dt if dt is None else dt,
        end_time=spec.end_time if end_time is None else end_time,
    )


# }}}
