"""Scheme and limiter-iteration configuration, plus the named scheme variants."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

LowFlux = Literal["rusanov", "godunov"]
HighFlux = Literal["central2", "central4", "none"]
LimiterKind = Literal["exact_lp", "approximate", "none", "unlimited"]
EntropyVariant = Literal["proper", "tadmor", "none"]


@dataclass(frozen=True)
class LimiterIterationConfig:
    """Tolerances and weights of the per-step limiter fixed-point loop.

    ``c_weights`` and ``b_multipliers`` default to all-ones and U'(y) when
    left as ``None``. ``init_from_old_state`` starts the predictor from the old
    state instead of the monotone update.
    """

    delta: float = 1e-12
    eps1: float = 1e-8
    eps2: float = 1e-8
    max_outer_iterations: int = 50
    c_weights: np.ndarray | None = None
    b_multipliers: np.ndarray | None = None
    entropy_variant: EntropyVariant = "proper"
    init_from_old_state: bool = False
    debug_dump: str | None = None

    def __post_init__(self) -> None:
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise ValueError("eps1 and eps2 must be positive")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be at least 1")
        if self.c_weights is not None and np.any(np.asarray(self.c_weights) < 0):
            raise ValueError("objective weights must be non-negative")


@dataclass(frozen=True)
class SchemeConfig:
    low_flux: LowFlux = "rusanov"
    high_flux: HighFlux = "none"
    limiter: LimiterKind = "none"
    entropy_variant: EntropyVariant = "none"
    iteration: LimiterIterationConfig = field(default_factory=LimiterIterationConfig)

    def __post_init__(self) -> None:
        if self.low_flux not in ("rusanov", "godunov"):
            raise ValueError(f"unknown low-order flux {self.low_flux!r}")
        if self.high_flux not in ("central2", "central4", "none"):
            raise ValueError(f"unknown high-order flux {self.high_flux!r}")
        if self.limiter not in ("exact_lp", "approximate", "none", "unlimited"):
            raise ValueError(f"unknown limiter {self.limiter!r}")
        if self.entropy_variant not in ("proper", "tadmor", "none"):
            raise ValueError(f"unknown entropy variant {self.entropy_variant!r}")
        if self.limiter == "approximate" and self.entropy_variant == "tadmor":
            raise ValueError("the closed-form limiter only supports the proper entropy flux")
        if self.iteration.entropy_variant != self.entropy_variant:
            object.__setattr__(self, "iteration", replace(self.iteration, entropy_variant=self.entropy_variant))

    @property
    def is_monotone(self) -> bool:
        return self.high_flux == "none" or self.limiter == "none"


def _hybrid(order: int, limiter: LimiterKind, variant: EntropyVariant) -> SchemeConfig:
    return SchemeConfig("rusanov", f"central{order}", limiter, variant)  # type: ignore[arg-type]


# Naming: scheme + L(P)/A(P) for exact/approximate limiters without entropy
# rows, L(E)/A(E) with them, T for the Tadmor entropy flux, digit = order.
VARIANTS: dict[str, SchemeConfig] = {
    "Godunov": SchemeConfig("godunov", "none", "none", "none"),
    "Rusanov": SchemeConfig("rusanov", "none", "none", "none"),
    "RusanovLP2": _hybrid(2, "exact_lp", "none"),
    "RusanovLET2": _hybrid(2, "exact_lp", "tadmor"),
    "RusanovLE2": _hybrid(2, "exact_lp", "proper"),
    "RusanovAE2": _hybrid(2, "approximate", "proper"),
    "RusanovLE4": _hybrid(4, "exact_lp", "proper"),
    "RusanovAE4": _hybrid(4, "approximate", "proper"),
    "RusanovAP2": _hybrid(2, "approximate", "none"),
    "RusanovAP4": _hybrid(4, "approximate", "none"),
}


def variant_config(name: str, **iteration_overrides) -> SchemeConfig:
    try:
        cfg = VARIANTS[name]
    except KeyError:
        raise ValueError(f"unknown variant {name!r}; valid names: {', '.join(VARIANTS)}") from None
    if iteration_overrides:
        cfg = replace(cfg, iteration=replace(cfg.iteration, **iteration_overrides))
    return cfg
