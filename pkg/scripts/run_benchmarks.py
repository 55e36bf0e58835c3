"""Run every scheme variant on both benchmarks and compare each to Godunov.

    python3 scripts/run_benchmarks.py [OUT_DIR]

Writes one run directory per (problem, variant) plus a comparison.csv against
the Godunov run of the same problem, and prints a summary table.
"""

import os
import sys

from entroflux.cli import main
from entroflux.io import compare_runs, read_metrics

VARIANTS = {
    "nonconvex_quartic": ["Godunov", "Rusanov", "RusanovLP2", "RusanovLET2", "RusanovLE2", "RusanovAE2",
                          "RusanovLE4", "RusanovAE4"],
    "buckley_leverett": ["Godunov", "Rusanov", "RusanovLP2", "RusanovLET2", "RusanovLE2", "RusanovAE2"],
}


def run_all(root: str) -> None:
    print(f"{'problem':<18} {'variant':<12} {'steps':>6} {'runtime':>8} {'max proper':>11} {'L1 to Godunov':>14}")
    for problem, names in VARIANTS.items():
        god = os.path.join(root, problem, "Godunov")
        for name in names:
            out = os.path.join(root, problem, name)
            if main(["run", "--problem", problem, "--variant", name, "--out-dir", out]) != 0:
                print(f"{problem:<18} {name:<12} failed, see {out}/error.txt")
                continue
            m = read_metrics(os.path.join(out, "metrics.csv"))
            l1 = compare_runs(out, god)[-1].l1
            print(f"{problem:<18} {name:<12} {m['steps']:>6} {float(m['runtime_s']):>7.2f}s "
                  f"{float(m['max_proper_residual']):>11.2e} {l1:>14.4e}")


if __name__ == "__main__":
    run_all(sys.argv[1] if len(sys.argv) > 1 else "runs")
