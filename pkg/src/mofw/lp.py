"""Dense two-phase primal simplex for small linear programs.

Every subproblem in this package has at most a few dozen variables, so the
solver keeps one explicit tableau and pivots on it.  Phase 1 minimizes the
sum of artificial variables to find a basic feasible point, phase 2 then
optimizes the real objective.  Free variables are split z = z+ - z-.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-10   # tableau entries below this are rejected as pivots
COST_TOL = 1e-9     # reduced-cost threshold for optimality
PHASE1_TOL = 1e-8   # residual artificial mass above this means infeasible


class PivotBudgetError(RuntimeError):
    """Pivot budget exhausted; the tableau is suspected of cycling."""


@dataclass
class LpProblem:
    """minimize objective . z  subject to
    ineq_lhs z <= ineq_rhs,  eq_lhs z = eq_rhs,
    z_i >= 0 unless i is listed in free_vars.
    """

    objective: np.ndarray
    ineq_lhs: np.ndarray
    ineq_rhs: np.ndarray
    eq_lhs: np.ndarray
    eq_rhs: np.ndarray
    free_vars: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        self.objective = np.atleast_1d(np.asarray(self.objective, dtype=float))
        k = self.objective.size
        if k < 1:
            raise ValueError("LP needs at least one variable")
        self.ineq_lhs = np.asarray(self.ineq_lhs, dtype=float).reshape(-1, k)
        self.ineq_rhs = np.atleast_1d(np.asarray(self.ineq_rhs, dtype=float))
        self.eq_lhs = np.asarray(self.eq_lhs, dtype=float).reshape(-1, k)
        self.eq_rhs = np.atleast_1d(np.asarray(self.eq_rhs, dtype=float))
        if self.ineq_lhs.shape[0] != self.ineq_rhs.size:
            raise ValueError("inequality rows and rhs disagree")
        if self.eq_lhs.shape[0] != self.eq_rhs.size:
            raise ValueError("equality rows and rhs disagree")
        self.free_vars = frozenset(int(i) for i in self.free_vars)
        if self.free_vars and (min(self.free_vars) < 0 or max(self.free_vars) >= k):
            raise ValueError("free_vars index out of range")

    @property
    def num_vars(self):
        return self.objective.size


@dataclass
class LpSolution:
    status: str                 # 'optimal' | 'infeasible' | 'unbounded'
    z: np.ndarray | None = None
    value: float | None = None
    iterations: int = 0


class _Tableau:
    """Simplex tableau with Dantzig pivoting and a Bland fallback.

    Layout: rows 0..M-1 hold the constraints (last column is the rhs, kept
    nonnegative), row M holds the reduced costs with -value in the corner.
    """

    def __init__(self, A, rhs, basis, allowed, debug=None):
        M, N = A.shape
        self.T = np.empty((M + 1, N + 1))
        self.T[:M, :N] = A
        self.T[:M, N] = rhs
        self.T[M, :] = 0.0
        self.M, self.N = M, N
        self.basis = list(basis)
        self.allowed = allowed          # bool mask of columns that may enter
        self.bland = False
        self.degenerate_streak = 0
        self.pivots = 0
        self.debug = debug
        self._work = np.empty_like(self.T)
        self._ratio = np.empty(M)
        self._red = np.empty(N)
        self._banned = np.empty(0, dtype=int)   # kept in sync with allowed

    def set_costs(self, costs):
        """Install a cost vector and price out the current basis."""
        row = self.T[self.M]
        row[: self.N] = costs
        row[self.N] = 0.0
        for r, b in enumerate(self.basis):
            cb = costs[b]
            if cb != 0.0:
                row -= cb * self.T[r]

    def _entering(self):
        red = self.T[self.M, : self.N]
        if self.bland:
            cand = np.nonzero(self.allowed & (red < -COST_TOL))[0]
            return int(cand[0]) if cand.size else -1
        buf = self._red
        np.copyto(buf, red)
        buf[self._banned] = np.inf
        j = int(buf.argmin())
        return j if buf[j] < -COST_TOL else -1

    def _leaving(self, j):
        if self.M == 0:
            return -1, 0.0
        col = self.T[: self.M, j]
        rhs = self.T[: self.M, self.N]
        ratios = self._ratio
        ratios.fill(np.inf)
        np.divide(rhs, col, out=ratios, where=col > PIVOT_TOL)
        r = int(ratios.argmin())
        best = ratios[r]
        if not np.isfinite(best):
            return -1, 0.0
        if self.bland:
            ties = np.nonzero(ratios <= best + 1e-15)[0]
            # smallest basic-variable index among the tied rows
            r = int(min(ties, key=lambda i: self.basis[i]))
        return r, float(best)

    def pivot(self, r, j):
        T = self.T
        row = T[r]
        row /= row[j]
        work = self._work
        np.multiply(T[:, j, None], row, out=work)
        work[r] = 0.0
        np.subtract(T, work, out=T)
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j
        self.pivots += 1
        if self.debug is not None:
            self.debug.write(f"pivot {self.pivots}: row {r} col {j}\n")
            np.savetxt(self.debug, T, fmt="%10.4g")

    def run(self, budget, degeneracy_cap):
        """Pivot to optimality; returns 'optimal' or 'unbounded'."""
        while True:
            if self.pivots >= budget:
                raise PivotBudgetError(
                    f"simplex exceeded its pivot budget of {budget}")
            j = self._entering()
            if j < 0:
                return "optimal"
            r, ratio = self._leaving(j)
            if r < 0:
                return "unbounded"
            if ratio <= 1e-12:
                self.degenerate_streak += 1
                if self.degenerate_streak > degeneracy_cap:
                    self.bland = True
            else:
                self.degenerate_streak = 0
            self.pivot(r, j)

    def basic_solution(self):
        x = np.zeros(self.N)
        for r, b in enumerate(self.basis):
            x[b] = self.T[r, self.N]
        return x


def solve_lp(prob: LpProblem, debug=None) -> LpSolution:
    """Solve an LpProblem with the two-phase dense simplex method.

    Dantzig pricing by default; after 3*(rows+vars) consecutive degenerate
    pivots the tableau switches to Bland's rule, which cannot cycle.  A hard
    pivot budget guards against numerical livelock and raises
    PivotBudgetError when hit.  Pass a text stream as ``debug`` to dump the
    tableau after every pivot.
    """
    k = prob.num_vars
    r1 = prob.ineq_rhs.size
    r2 = prob.eq_rhs.size
    M = r1 + r2

    # Split free variables into positive and negative parts.
    col_of = []                 # (original index, sign) per structural column
    for i in range(k):
        col_of.append((i, 1.0))
        if i in prob.free_vars:
            col_of.append((i, -1.0))
    ns = len(col_of)
    body = np.vstack([prob.ineq_lhs, prob.eq_lhs]) if r2 else prob.ineq_lhs
    rhs = np.concatenate([prob.ineq_rhs, prob.eq_rhs])
    flip = rhs < 0
    n_art = r2 + int(np.count_nonzero(flip[:r1]))

    N = ns + r1 + n_art
    col_idx = [i for i, _ in col_of]
    col_sign = np.array([s for _, s in col_of])
    A = np.zeros((M, N))
    A[:, :ns] = body[:, col_idx]
    A[:, :ns] *= col_sign
    A[:r1, ns:ns + r1] = np.eye(r1)

    # Normalize rhs >= 0, then add artificials where no slack can seed the basis.
    A[flip] *= -1.0
    rhs = np.abs(rhs)
    basis = [-1] * M
    art_cols = []
    for r in range(M):
        if r < r1 and not flip[r]:
            basis[r] = ns + r       # slack enters the basis directly
        else:
            jc = ns + r1 + len(art_cols)
            A[r, jc] = 1.0
            art_cols.append(jc)
            basis[r] = jc

    allowed = np.ones(N, dtype=bool)
    tab = _Tableau(A, rhs, basis, allowed, debug=debug)
    budget = 2000 + 200 * (M + N)
    degeneracy_cap = 3 * (r1 + r2 + k)

    # Phase 1: minimize the artificial mass.
    if n_art:
        costs1 = np.zeros(N)
        costs1[art_cols] = 1.0
        tab.set_costs(costs1)
        status = tab.run(budget, degeneracy_cap)
        if status != "optimal":
            raise PivotBudgetError("phase 1 reported unbounded; tableau corrupt")
        if -tab.T[tab.M, tab.N] > PHASE1_TOL:
            return LpSolution(status="infeasible", iterations=tab.pivots)
        # Drive leftover artificials out of the basis where possible.
        first_art = N - n_art
        for r, b in enumerate(tab.basis):
            if b >= first_art:
                row = tab.T[r, :first_art]
                cand = np.nonzero(np.abs(row) > PIVOT_TOL)[0]
                if cand.size:
                    tab.pivot(r, int(cand[0]))
        allowed[first_art:] = False
        tab._banned = np.nonzero(~allowed)[0]

    # Phase 2: the real objective on the split columns.
    costs2 = np.zeros(N)
    for jc, (i, s) in enumerate(col_of):
        costs2[jc] = s * prob.objective[i]
    tab.set_costs(costs2)
    tab.bland = False
    tab.degenerate_streak = 0
    status = tab.run(budget, degeneracy_cap)
    if status == "unbounded":
        return LpSolution(status="unbounded", iterations=tab.pivots)

    x_ext = tab.basic_solution()
    z = np.zeros(k)
    for jc, (i, s) in enumerate(col_of):
        z[i] += s * x_ext[jc]
    return LpSolution(
        status="optimal",
        z=z,
        value=float(prob.objective @ z),
        iterations=tab.pivots,
    )
