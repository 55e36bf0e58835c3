"""Small dense linear programs: maximize c.x subject to range rows and box bounds.

The engine is a bounded-variable primal simplex on a dense tableau with
Bland's smallest-index rule. Each range row ``lower <= a.x <= upper`` gets a
slack ``s = a.x`` carrying the row bounds, so the equality system is
``A x - s = 0``. Phase 1 minimises the sum of artificials added for rows the
starting point (x at its lower bounds) violates.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
OPT_TOL = 1e-10
# presolve drops rows whose violation over the whole box stays below this
ROW_TOL = 0.5 * FEAS_TOL

Status = Literal["optimal", "infeasible", "iteration_limit"]


@dataclass(frozen=True)
class Row:
    lower: float
    coeffs: tuple[tuple[int, float], ...]
    upper: float

    def value(self, x: np.ndarray) -> float:
        return float(sum(c * x[j] for j, c in self.coeffs))


@dataclass
class LinearProgram:
    n_vars: int
    objective: np.ndarray
    rows: list[Row] = field(default_factory=list)
    var_bounds: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.n_vars,):
            raise ValueError("objective length must equal n_vars")
        if self.var_bounds is None:
            self.var_bounds = np.tile([0.0, 1.0], (self.n_vars, 1))
        self.var_bounds = np.asarray(self.var_bounds, dtype=float).reshape(self.n_vars, 2)
        if np.any(self.var_bounds[:, 0] > self.var_bounds[:, 1]):
            raise ValueError("variable lower bound exceeds upper bound")
        if not np.all(np.isfinite(self.var_bounds)):
            raise ValueError("variable bounds must be finite")
        for r in self.rows:
            if r.lower > r.upper:
                raise ValueError(f"row lower bound exceeds upper bound: {r}")
            if len(r.coeffs) > self.n_vars or any(not 0 <= j < self.n_vars for j, _ in r.coeffs):
                raise ValueError(f"row references unknown variables: {r}")

    def add_row(self, lower: float, coeffs: Iterable[tuple[int, float]], upper: float) -> None:
        self.rows.append(Row(float(lower), tuple((int(j), float(c)) for j, c in coeffs), float(upper)))

    def dense(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Constraint matrix and row bounds as dense arrays."""
        A = np.zeros((len(self.rows), self.n_vars))
        lo = np.empty(len(self.rows))
        hi = np.empty(len(self.rows))
        for i, r in enumerate(self.rows):
            for j, c in r.coeffs:
                A[i, j] += c
            lo[i], hi[i] = r.lower, r.upper
        return A, lo, hi

    def max_violation(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        viol = max(0.0, float(np.max(self.var_bounds[:, 0] - x, initial=0.0)))
        viol = max(viol, float(np.max(x - self.var_bounds[:, 1], initial=0.0)))
        if self.rows:
            A, lo, hi = self.dense()
            ax = A @ x
            viol = max(viol, float(np.max(lo - ax, initial=0.0)), float(np.max(ax - hi, initial=0.0)))
        return viol

    def to_text(self) -> str:
        """CPLEX-LP-like listing, for cross-checking with external solvers."""

        def term(j: int, c: float, first: bool) -> str:
            sign = "-" if c < 0 else ("" if first else "+")
            return f"{sign} {abs(float(c))!r} a{j}".strip()

        lines = ["Maximize", " obj: " + " ".join(term(j, c, k == 0) for k, (j, c) in enumerate(
            (j, c) for j, c in enumerate(self.objective) if c != 0)) or " obj: 0", "Subject To"]
        for i, r in enumerate(self.rows):
            expr = " ".join(term(j, c, k == 0) for k, (j, c) in enumerate(r.coeffs)) or "0 a0"
            if math.isfinite(r.lower) and math.isfinite(r.upper):
                lines.append(f" r{i}: {r.lower!r} <= {expr} <= {r.upper!r}")
            elif math.isfinite(r.lower):
                lines.append(f" r{i}: {expr} >= {r.lower!r}")
            elif math.isfinite(r.upper):
                lines.append(f" r{i}: {expr} <= {r.upper!r}")
        lines.append("Bounds")
        lines += [f" {float(lo)!r} <= a{j} <= {float(hi)!r}" for j, (lo, hi) in enumerate(self.var_bounds)]
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LpSolution:
    status: Status
    x: np.ndarray
    objective_value: float
    iterations: int = 0
    # per-variable and per-row codes (0 basic, 1 at lower, 2 at upper); feeds ``warm=``
    basis_state: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)


# {{{ simplex kernel


class _IterationLimit(Exception):
    pass


class _Tableau:
    """Bounded-variable simplex state for ``min cost.z  s.t.  M z = 0,  lo <= z <= hi``."""

    def __init__(self, M: np.ndarray, lo: np.ndarray, hi: np.ndarray, basis: list[int], z: np.ndarray):
        self.M = M
        self.lo = lo
        self.hi = hi
        self.basis = list(basis)
        self.z = z
        self.T = np.linalg.solve(M[:, self.basis], M)
        self.iterations = 0

    def run(self, cost: np.ndarray, max_iterations: int) -> None:
        m, N = self.T.shape
        is_basic = np.zeros(N, dtype=bool)
        is_basic[self.basis] = True
        rc = cost - cost[self.basis] @ self.T
        while True:
            movable = (self.hi - self.lo) > 0
            at_lo = self.z <= self.lo
            up = ~is_basic & movable & (rc < -OPT_TOL) & (self.z < self.hi)
            down = ~is_basic & movable & (rc > OPT_TOL) & ~at_lo
            cand = np.flatnonzero(up | down)
            if cand.size == 0:
                return
            if self.iterations >= max_iterations:
                raise _IterationLimit
            self.iterations += 1

            j = int(cand[0])
            direction = 1.0 if up[j] else -1.0
            col = direction * self.T[:, j]
            xb = self.z[self.basis]
            lb = self.lo[self.basis]
            ub = self.hi[self.basis]
            ratios = np.full(m, np.inf)
            dec = col > PIVOT_TOL
            inc = col < -PIVOT_TOL
            ratios[dec] = np.maximum(xb[dec] - lb[dec], 0.0) / col[dec]
            ratios[inc] = np.maximum(ub[inc] - xb[inc], 0.0) / -col[inc]
            theta_flip = self.hi[j] - self.lo[j]
            theta = float(ratios.min()) if m else np.inf

            if theta_flip <= theta:
                self.z[self.basis] = xb - theta_flip * col
                self.z[j] = self.hi[j] if direction > 0 else self.lo[j]
                continue
            if not np.isfinite(theta):
                raise RuntimeError("unbounded direction in a box-bounded program")

            ties = np.flatnonzero(ratios <= theta + 1e-12 * max(1.0, theta))
            r = int(ties[np.argmin(np.asarray(self.basis)[ties])])
            leaving = self.basis[r]
            self.z[self.basis] = xb - theta * col
            self.z[j] = self.z[j] + direction * theta
            self.z[leaving] = self.lo[leaving] if col[r] > 0 else self.hi[leaving]

            piv = self.T[r, j]
            self.T[r] /= piv
            other = self.T[:, j].copy()
            other[r] = 0.0
            self.T -= np.outer(other, self.T[r])
            rc = rc - rc[j] * self.T[r]
            self.basis[r] = j
            is_basic[leaving] = False
            is_basic[j] = True

    def refine(self) -> None:
        """Recompute basic values from the nonbasic ones with the original matrix."""
        nb = np.ones(self.M.shape[1], dtype=bool)
        nb[self.basis] = False
        rhs = -self.M[:, nb] @ self.z[nb]
        self.z[self.basis] = np.linalg.solve(self.M[:, self.basis], rhs)


def _crash(c: np.ndarray, A: np.ndarray, row_lo: np.ndarray, row_hi: np.ndarray,
           var_lo: np.ndarray, var_hi: np.ndarray) -> np.ndarray:
    """Greedy starting point: from the lower bounds, move each improving variable
    to its upper bound when every row it touches stays (or already was) satisfied."""
    x = var_lo.copy()
    r = A @ x
    ok = (r >= row_lo) & (r <= row_hi)
    for j in np.flatnonzero(c > 0).tolist():
        rows = np.flatnonzero(A[:, j])
        if not ok[rows].all():
            continue
        new = r[rows] + A[rows, j] * (var_hi[j] - var_lo[j])
        if np.all((new >= row_lo[rows]) & (new <= row_hi[rows])):
            r[rows] = new
            x[j] = var_hi[j]
    return x


def _state(tab: _Tableau, n_struct: int) -> np.ndarray | None:
    if any(j >= n_struct for j in tab.basis):
        return None
    z, lo = tab.z[:n_struct], tab.lo[:n_struct]
    state = np.where(z <= lo, 1, 2).astype(np.int8)
    state[tab.basis] = 0
    return state


def _warm_tableau(A: np.ndarray, row_lo: np.ndarray, row_hi: np.ndarray, var_lo: np.ndarray,
                  var_hi: np.ndarray, warm: np.ndarray) -> _Tableau | None:
    """Tableau on a previous basis if that basis is still primal feasible."""
    m, n = A.shape
    if warm.size != n + m or np.count_nonzero(warm == 0) != m:
        return None
    M = np.hstack([A, -np.eye(m)])
    lo = np.concatenate([var_lo, row_lo])
    hi = np.concatenate([var_hi, row_hi])
    basis = np.flatnonzero(warm == 0)
    nb = warm != 0
    z = np.where(warm == 2, hi, lo)
    if not np.all(np.isfinite(z[nb])):
        return None
    B = M[:, basis]
    if np.linalg.cond(B) > 1e10:
        return None
    zb = np.linalg.solve(B, -M[:, nb] @ z[nb])
    if np.any(zb < lo[basis] - FEAS_TOL) or np.any(zb > hi[basis] + FEAS_TOL):
        return None
    z[basis] = zb
    return _Tableau(M, lo, hi, basis.tolist(), z)


def _simplex(c: np.ndarray, A: np.ndarray, row_lo: np.ndarray, row_hi: np.ndarray,
             var_lo: np.ndarray, var_hi: np.ndarray, max_iterations: int,
             warm: np.ndarray | None = None) -> tuple[Status, np.ndarray, int, np.ndarray | None]:
    m, n = A.shape
    if warm is not None:
        tab = _warm_tableau(A, row_lo, row_hi, var_lo, var_hi, warm)
        if tab is not None:
            try:
                tab.run(np.concatenate([-c, np.zeros(m)]), max_iterations)
            except _IterationLimit:
                return "iteration_limit", tab.z[:n].copy(), tab.iterations, None
            tab.refine()
            return "optimal", np.clip(tab.z[:n], var_lo, var_hi), tab.iterations, _state(tab, n + m)
    x0 = _crash(c, A, row_lo, row_hi, var_lo, var_hi)
    r = A @ x0
    feasible = (r >= row_lo - FEAS_TOL) & (r <= row_hi + FEAS_TOL)
    bad = np.flatnonzero(~feasible)
    k = bad.size

    # columns: x (n), s (m), artificials (k)
    M = np.zeros((m, n + m + k))
    M[:, :n] = A
    M[:, n : n + m] = -np.eye(m)
    s0 = np.clip(r, row_lo, row_hi)
    for q, i in enumerate(bad):
        M[i, n + m + q] = 1.0 if s0[i] > r[i] else -1.0
    lo = np.concatenate([var_lo, row_lo, np.zeros(k)])
    hi = np.concatenate([var_hi, row_hi, np.full(k, np.inf)])
    z = np.concatenate([x0, s0, np.abs(s0[bad] - r[bad])])
    basis = [n + i if feasible[i] else n + m + int(np.searchsorted(bad, i)) for i in range(m)]

    tab = _Tableau(M, lo, hi, basis, z)
    try:
        if k:
            cost1 = np.zeros(n + m + k)
            cost1[n + m :] = 1.0
            tab.run(cost1, max_iterations)
            tab.refine()
            if tab.z[n + m :].sum() > FEAS_TOL:
                return "infeasible", tab.z[:n].copy(), tab.iterations, None
            tab.hi[n + m :] = 0.0
            tab.z[n + m :] = np.clip(tab.z[n + m :], 0.0, 0.0)
        cost2 = np.zeros(n + m + k)
        cost2[:n] = -c
        tab.run(cost2, max_iterations)
    except _IterationLimit:
        return "iteration_limit", tab.z[:n].copy(), tab.iterations, None
    tab.refine()
    x = np.clip(tab.z[:n], var_lo, var_hi)
    return "optimal", x, tab.iterations, _state(tab, n + m)


# }}}


def _presolve(A: np.ndarray, rlo: np.ndarray, rhi: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Drop rows implied by the box and turn singleton rows into bounds.

    A row counts as implied when it holds to within ROW_TOL everywhere in the
    box. Bounds are tightened exactly. If the exact bounds of a variable cross only
    because of a tolerance-level violation (a tiny coefficient amplifies it),
    the variable is fixed at whichever crossing point violates its singleton
    rows least, provided that stays within FEAS_TOL. Returns the kept-row mask,
    or None when the program is infeasible.
    """
    keep = np.count_nonzero(A, axis=1) > 0
    nnz = np.count_nonzero(A, axis=1)
    for _ in range(4):
        # redundancy first, so rows that hold to tolerance never tighten a bound
        act_lo = np.minimum(A * lo, A * hi).sum(axis=1)
        act_hi = np.maximum(A * lo, A * hi).sum(axis=1)
        redundant = keep & (act_lo >= rlo - ROW_TOL) & (act_hi <= rhi + ROW_TOL)
        keep &= ~redundant
        single = np.flatnonzero(keep & (nnz == 1))
        if single.size:
            cols = np.argmax(A[single] != 0, axis=1)
            a = A[single, cols]
            b1, b2 = rlo[single] / a, rhi[single] / a
            L, U = lo.copy(), hi.copy()
            np.maximum.at(L, cols, np.where(a > 0, b1, b2))
            np.minimum.at(U, cols, np.where(a > 0, b2, b1))
            for j in np.flatnonzero(L > U):
                mine = cols == j
                aj, lj, hj = a[mine], rlo[single[mine]], rhi[single[mine]]
                cands = np.clip([L[j], U[j]], lo[j], hi[j])
                viol = [float(np.max(np.maximum(lj - aj * x, aj * x - hj))) for x in cands]
                k = int(np.argmin(viol))
                if viol[k] > FEAS_TOL:
                    return None
                L[j] = U[j] = cands[k]
            lo[:], hi[:] = L, U
            keep[single] = False
        if not single.size:
            break
    return keep


def solve(lp: LinearProgram, *, presolve: bool = True, max_iterations: int | None = None) -> LpSolution:
    """Maximise ``lp.objective @ x``; deterministic for identical input."""
    A, rlo, rhi = lp.dense()
    return solve_arrays(lp.objective, A, rlo, rhi, lp.var_bounds[:, 0], lp.var_bounds[:, 1],
                        presolve=presolve, max_iterations=max_iterations)


def solve_arrays(c: np.ndarray, A: np.ndarray, rlo: np.ndarray, rhi: np.ndarray,
                 var_lo: np.ndarray, var_hi: np.ndarray, *, presolve: bool = True,
                 max_iterations: int | None = None,
                 warm: tuple[np.ndarray, np.ndarray] | None = None) -> LpSolution:
    """Same as :func:`solve` on dense data; independent blocks are solved separately.

    ``warm`` is the ``basis_state`` of an earlier solution of a program with the
    same shape. Each block restarts from that basis when it is still feasible
    and is solved from scratch otherwise, so the answer never depends on it
    beyond the choice among alternative optima.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    rlo = np.array(rlo, dtype=float)
    rhi = np.array(rhi, dtype=float)
    lo = np.array(var_lo, dtype=float)
    hi = np.array(var_hi, dtype=float)
    m, n = A.shape
    if max_iterations is None:
        max_iterations = 100 * (n + m)
    if warm is not None and (warm[0].shape != (n,) or warm[1].shape != (m,)):
        warm = None

    empty = np.count_nonzero(A, axis=1) == 0
    if np.any(rlo[empty] > FEAS_TOL) or np.any(rhi[empty] < -FEAS_TOL):
        return LpSolution("infeasible", lo.copy(), float("nan"))
    if presolve:
        keep = _presolve(A, rlo, rhi, lo, hi)
        if keep is None:
            return LpSolution("infeasible", np.array(var_lo, dtype=float), float("nan"))
    else:
        keep = ~empty
    kept = np.flatnonzero(keep)
    A, rlo, rhi = A[keep], rlo[keep], rhi[keep]

    x = np.where(c >= 0, hi, lo)
    var_state = np.where(c >= 0, 2, 1).astype(np.int8)
    row_state: np.ndarray | None = np.zeros(m, dtype=np.int8)
    iterations = 0
    for rows, cols in _blocks(A):
        Ab = A[np.ix_(rows, cols)]
        wb = None if warm is None else np.concatenate([warm[0][cols], warm[1][kept[rows]]])
        status, xs, its, st = _simplex(c[cols], Ab, rlo[rows], rhi[rows], lo[cols], hi[cols],
                                       max_iterations - iterations, wb)
        iterations += its
        x[cols] = xs
        if status != "optimal":
            return LpSolution(status, x, float(c @ x), iterations)
        if st is None or row_state is None:
            row_state = None
        else:
            var_state[cols] = st[: cols.size]
            row_state[kept[rows]] = st[cols.size :]
    state = None if row_state is None else (var_state, row_state)
    return LpSolution("optimal", x, float(c @ x), iterations, state)


def _blocks(A: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Connected components of the row/variable incidence graph, ordered by first variable."""
    m, n = A.shape
    if m == 0:
        return []
    parent = list(range(n))

    def find(j: int) -> int:
        while parent[j] != j:
            parent[j] = parent[parent[j]]
            j = parent[j]
        return j

    nz = A != 0
    first = np.argmax(nz, axis=1).tolist()
    ri, vj = np.nonzero(nz)
    for i, j in zip(ri.tolist(), vj.tolist()):
        a, b = find(first[i]), find(j)
        if a != b:
            parent[max(a, b)] = min(a, b)
    var_root = np.array([find(j) for j in range(n)])
    row_root = var_root[first]
    out = []
    for r in np.unique(row_root):
        out.append((np.flatnonzero(row_root == r), np.flatnonzero(var_root == r)))
    return out


def vertex_enumeration(lp: LinearProgram) -> tuple[Status, float]:
    """Brute-force optimum over all basic solutions; only for tiny programs.

    For every choice of k "free" variables and k tight row bounds, the other
    variables sit at box bounds and the k x k system fixes the free ones.
    """
    from itertools import combinations, product

    n = lp.n_vars
    A, rlo, rhi = lp.dense()
    m = A.shape[0]
    blo, bhi = lp.var_bounds[:, 0], lp.var_bounds[:, 1]
    best = -np.inf
    tol = 1e-9
    for k in range(0, min(n, m) + 1):
        for S in combinations(range(n), k):
            S = list(S)
            nb = [j for j in range(n) if j not in S]
            assign = list(product(*[(blo[j], bhi[j]) for j in nb]))
            nb_vals = np.array(assign, dtype=float).reshape(len(assign), len(nb))
            for R in combinations(range(m), k):
                R = list(R)
                sides = [[v for v in (rlo[i], rhi[i]) if math.isfinite(v)] for i in R]
                if any(not s for s in sides):
                    continue
                combos = list(product(*sides))
                side_vals = np.array(combos, dtype=float).reshape(len(combos), k)
                B = A[np.ix_(R, S)]
                if k and abs(np.linalg.det(B)) < 1e-12:
                    continue
                # every (nonbasic assignment, tight side) pair
                X = np.empty((nb_vals.shape[0] * side_vals.shape[0], n))
                X[:, nb] = np.repeat(nb_vals, side_vals.shape[0], axis=0)
                if k:
                    rhs = np.tile(side_vals, (nb_vals.shape[0], 1)) - X[:, nb] @ A[np.ix_(R, nb)].T
                    X[:, S] = np.linalg.solve(B, rhs.T).T
                ok = np.all((X >= blo - tol) & (X <= bhi + tol), axis=1)
                if m:
                    AX = X @ A.T
                    ok &= np.all((AX >= rlo - tol) & (AX <= rhi + tol), axis=1)
                if np.any(ok):
                    best = max(best, float(np.max(X[ok] @ lp.objective)))
    if best == -np.inf:
        return "infeasible", float("nan")
    return "optimal", best


def from_dense(c: Sequence[float], A: np.ndarray, row_lo: Sequence[float], row_hi: Sequence[float],
               bounds: np.ndarray | None = None) -> LinearProgram:
    A = np.asarray(A, dtype=float)
    lp = LinearProgram(len(c), np.asarray(c, dtype=float), [], bounds)
    for i in range(A.shape[0]):
        lp.add_row(row_lo[i], [(j, A[i, j]) for j in np.flatnonzero(A[i])], row_hi[i])
    return lp
