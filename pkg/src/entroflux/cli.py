"""``entroflux`` command line: ``run``, ``compare`` and ``verify``.

Exit codes: 0 success, 1 numerical abort or failed checks, 2 usage errors
(unknown problem or variant, bad config file, grid mismatch).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Sequence

from entroflux.config import VARIANTS, SchemeConfig, variant_config
from entroflux.core import BUILTIN_PROBLEMS, builtin_problem, with_resolution
from entroflux.io import GridMismatchError, compare_runs, write_comparison, write_run
from entroflux.timestepper import TimeStepError, run_simulation
from entroflux.verify import DEFAULT_CASES, SUITES, run_suite, write_report

MANIFEST = "manifest.txt"
COMPARISON = "comparison.csv"

# keys accepted in a --config file; values are parsed like the matching flag
CONFIG_KEYS = {
    "problem": str,
    "variant": str,
    "dt": float,
    "cells": int,
    "end_time": float,
    "out_dir": str,
    "seed": int,
    "courant": float,
    "snapshots": str,
    "init_from_old_state": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


class UsageError(ValueError):
    pass


@dataclass
class RunManifest:
    problem: str
    variant: str
    config: SchemeConfig
    dt_policy: str
    out_dir: str
    seed: int = 0
    dt: float | None = None
    cells: int | None = None
    end_time: float | None = None
    courant: float | None = None
    snapshots: list[float] = field(default_factory=list)

    def to_text(self) -> str:
        it = self.config.iteration
        lines = [
            f"problem={self.problem}",
            f"variant={self.variant}",
            f"low_flux={self.config.low_flux}",
            f"high_flux={self.config.high_flux}",
            f"limiter={self.config.limiter}",
            f"entropy_variant={self.config.entropy_variant}",
            f"init_from_old_state={it.init_from_old_state}",
            f"eps1={it.eps1!r}",
            f"eps2={it.eps2!r}",
            f"delta={it.delta!r}",
            f"max_outer_iterations={it.max_outer_iterations}",
            f"dt_policy={self.dt_policy}",
            f"seed={self.seed}",
            f"out_dir={self.out_dir}",
        ]
        for key in ("dt", "cells", "end_time", "courant"):
            v = getattr(self, key)
            if v is not None:
                lines.append(f"{key}={v!r}")
        if self.snapshots:
            lines.append("snapshots=" + ",".join(repr(t) for t in self.snapshots))
        return "\n".join(lines) + "\n"


def read_config_file(path: str) -> dict[str, object]:
    """Flat ``key=value`` lines; ``#`` starts a comment. Dashes in keys are allowed."""
    out: dict[str, object] = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from None
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: expected one of {', '.join(CONFIG_KEYS)} as key=value")
            try:
                out[key] = CONFIG_KEYS[key](value.strip())
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {value.strip()!r}") from None
    return out


def _parse_times(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad snapshot list {text!r}") from None


def build_manifest(args: argparse.Namespace) -> RunManifest:
    values: dict[str, object] = read_config_file(args.config) if args.config else {}
    # flags override the file
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            values[key] = v
    problem = values.get("problem")
    variant = values.get("variant")
    if problem not in BUILTIN_PROBLEMS:
        raise UsageError(f"unknown problem {problem!r}; valid names: {', '.join(BUILTIN_PROBLEMS)}")
    if variant not in VARIANTS:
        raise UsageError(f"unknown variant {variant!r}; valid names: {', '.join(VARIANTS)}")
    cfg = variant_config(str(variant), init_from_old_state=bool(values.get("init_from_old_state", False)))
    dt = values.get("dt")
    cells = values.get("cells")
    if dt is not None and not float(dt) > 0:  # type: ignore[arg-type]
        raise UsageError("--dt must be positive")
    if cells is not None and int(cells) < 3:  # type: ignore[arg-type]
        raise UsageError("--cells must be at least 3")
    spec = builtin_problem(str(problem))
    policy = "fixed" if (dt is not None or (cells is None and spec.dt)) else "adaptive"
    out_dir = str(values.get("out_dir") or os.path.join("runs", f"{problem}-{variant}"))
    return RunManifest(
        problem=str(problem),
        variant=str(variant),
        config=cfg,
        dt_policy=policy,
        out_dir=out_dir,
        seed=int(values.get("seed", 0)),  # type: ignore[arg-type]
        dt=None if dt is None else float(dt),  # type: ignore[arg-type]
        cells=None if cells is None else int(cells),  # type: ignore[arg-type]
        end_time=None if values.get("end_time") is None else float(values["end_time"]),  # type: ignore[arg-type]
        courant=None if values.get("courant") is None else float(values["courant"]),  # type: ignore[arg-type]
        snapshots=_parse_times(str(values["snapshots"])) if values.get("snapshots") else [],
    )


def execute(manifest: RunManifest) -> int:
    spec = builtin_problem(manifest.problem)
    if manifest.cells is not None:
        # a refined grid does not inherit the benchmark's fixed step
        spec = replace(with_resolution(spec, manifest.cells), dt=None)
    if manifest.end_time is not None:
        spec = replace(spec, end_time=manifest.end_time)
    os.makedirs(manifest.out_dir, exist_ok=True)
    with open(os.path.join(manifest.out_dir, MANIFEST), "w") as fh:
        fh.write(manifest.to_text())
    trace = run_simulation(
        spec,
        manifest.config,
        manifest.dt_policy,  # type: ignore[arg-type]
        manifest.snapshots,
        dt=manifest.dt,
        courant=manifest.courant,
        raise_on_error=False,
    )
    trace.metadata.update(variant=manifest.variant, seed=manifest.seed)
    write_run(manifest.out_dir, trace, spec.grid.interfaces)
    if trace.error:
        print(f"run aborted: {trace.error}", file=sys.stderr)
        return 1
    print(f"{manifest.variant} on {manifest.problem}: {trace.n_steps} steps, wrote {manifest.out_dir}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        manifest = build_manifest(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return execute(manifest)
    except TimeStepError as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return 1


def _cmd_compare(args: argparse.Namespace) -> int:
    try:
        reports = compare_runs(args.run_a, args.run_b)
    except (GridMismatchError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = args.out or os.path.join(args.run_a, COMPARISON)
    write_comparison(out, reports)
    for r in reports:
        print(f"t={r.time:.17g} L1={r.l1:.17g}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    results = run_suite(args.suite, seed=args.seed, cases=args.cases)
    return 0 if write_report(results, sys.stdout) else 1


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entroflux", description="Entropy-constrained flux limiting for 1D scalar conservation laws.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scheme variant on a builtin problem")
    r.add_argument("--problem", help=f"one of {', '.join(BUILTIN_PROBLEMS)}")
    r.add_argument("--variant", help=f"one of {', '.join(VARIANTS)}")
    r.add_argument("--dt", type=float, help="fixed time step (default: the problem's own, else adaptive)")
    r.add_argument("--cells", type=int)
    r.add_argument("--end-time", dest="end_time", type=float)
    r.add_argument("--courant", type=float, help="Courant number for adaptive stepping")
    r.add_argument("--snapshots", help="comma-separated extra snapshot times")
    r.add_argument("--out-dir", dest="out_dir")
    r.add_argument("--seed", type=int)
    r.add_argument("--config", help="flat key=value file; flags override it")
    r.add_argument("--init-from-old-state", dest="init_from_old_state", action="store_true",
                   help="start the predictor loop from the old state")
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("compare", help="distances between two run directories")
    c.add_argument("run_a")
    c.add_argument("run_b")
    c.add_argument("--out", help=f"output csv (default: RUN_A/{COMPARISON})")
    c.set_defaults(func=_cmd_compare)

    v = sub.add_parser("verify", help="randomised invariant suites, JSON lines on stdout")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--cases", type=int, default=None, help="cases per suite (defaults: "
                   + ", ".join(f"{k}={n}" for k, n in DEFAULT_CASES.items()) + ")")
    v.set_defaults(func=_cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = make_parser().parse_args(argv)
    return int(args.func(args))


if __name__ == "__main__":
    sys.exit(main())
