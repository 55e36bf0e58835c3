"""Fine-grid Godunov references and the distance of LE2 to them.

    python3 scripts/reference_convergence.py

Runs Godunov at 8x and 16x refinement, restricts to the benchmark grid and
prints the self-convergence and the relative L1 distance of each variant.
"""

from dataclasses import replace

import numpy as np

from entroflux import builtin_problem, restrict, run_simulation, variant_config, with_resolution


def fine_godunov(spec, factor):
    fine = with_resolution(spec, spec.grid.n_cells * factor)
    fine = replace(fine, dt=spec.dt / factor if spec.dt else None)
    return restrict(run_simulation(fine, variant_config("Godunov")).final, factor)


def rel(u, v):
    return float(np.abs(u - v).sum() / np.abs(v).sum())


for problem in ("nonconvex_quartic", "buckley_leverett"):
    spec = builtin_problem(problem)
    g8, g16 = fine_godunov(spec, 8), fine_godunov(spec, 16)
    print(f"{problem}: reference self-convergence {rel(g8, g16):.4f}")
    for name in ("Godunov", "Rusanov", "RusanovLP2", "RusanovLET2", "RusanovLE2", "RusanovAE2"):
        u = run_simulation(spec, variant_config(name)).final
        print(f"  {name:<12} L1/|ref| = {rel(u, g16):.4f}")
