"""Flux-corrected transport with entropy constraints for 1D scalar conservation laws."""

from entroflux.approx import approximate_limiters
from entroflux.config import VARIANTS, LimiterIterationConfig, SchemeConfig, variant_config
from entroflux.core import (
    BUILTIN_PROBLEMS,
    CellField,
    EntropyPair,
    FluxFunction,
    Grid1D,
    ProblemSpec,
    builtin_problem,
    with_resolution,
)
from entroflux.fluxes import InterfaceFluxSet, assemble_interface_fluxes
from entroflux.limiters import LimiterError, LimiterResult, solve_step_limiters
from entroflux.lp import LinearProgram, LpSolution, Row, solve, vertex_enumeration
from entroflux.timestepper import (
    SolutionTrace,
    TimeStepError,
    check_time_step,
    l1_distance,
    restrict,
    run_simulation,
    step,
)

__all__ = [
    "BUILTIN_PROBLEMS",
    "CellField",
    "EntropyPair",
    "FluxFunction",
    "Grid1D",
    "InterfaceFluxSet",
    "LimiterError",
    "LimiterIterationConfig",
    "LimiterResult",
    "LinearProgram",
    "LpSolution",
    "ProblemSpec",
    "Row",
    "SchemeConfig",
    "SolutionTrace",
    "TimeStepError",
    "VARIANTS",
    "approximate_limiters",
    "assemble_interface_fluxes",
    "builtin_problem",
    "check_time_step",
    "l1_distance",
    "restrict",
    "run_simulation",
    "solve",
    "solve_step_limiters",
    "step",
    "variant_config",
    "vertex_enumeration",
    "with_resolution",
]
