"""Polytopes in halfspace form and the geometric queries the solvers need.

A polytope is stored as {x : A x <= b, C x = d}.  All operations here are
pure functions; the heavy machinery (vertex enumeration) exists for test
oracles and for handing a V-representation to the away-step solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

ACTIVE_TOL = 1e-9     # default tolerance for tight-constraint detection
DEDUP_TOL = 1e-8      # basic solutions closer than this are one vertex
RATIO_GUARD = 1e-12   # a_i . dir below this counts as nonpositive


@dataclass
class Polytope:
    """H-representation {x : A x <= b, C x = d} in R^n.

    ``diameter_hint`` is an optional upper bound on the set diameter; solvers
    use it to cap a formally unbounded ratio test.  Emptiness of the feasible
    region is not checked here, call :func:`check_nonempty` when needed.
    """

    A: np.ndarray
    b: np.ndarray
    C: np.ndarray
    d: np.ndarray
    diameter_hint: float | None = None

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        if self.A.ndim != 2:
            raise ValueError("A must be a 2-d matrix")
        n = self.A.shape[1]
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        self.C = np.asarray(self.C, dtype=float).reshape(-1, n)
        self.d = np.atleast_1d(np.asarray(self.d, dtype=float))
        if self.b.size != self.A.shape[0]:
            raise ValueError("A and b disagree on the number of inequality rows")
        if self.d.size != self.C.shape[0]:
            raise ValueError("C and d disagree on the number of equality rows")
        if self.diameter_hint is not None and self.diameter_hint < 0:
            raise ValueError("diameter_hint must be nonnegative")

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def m1(self):
        return self.A.shape[0]

    @property
    def m2(self):
        return self.C.shape[0]


@dataclass
class VertexSet:
    """A finite list of polytope vertices, one per row."""

    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if self.vertices.ndim != 2:
            raise ValueError("vertices must be a (count, n) array")

    def __len__(self):
        return self.vertices.shape[0]

    def __iter__(self):
        return iter(self.vertices)


@dataclass
class TightSet:
    """Inequality rows active at a point, as 0-based indices into A."""

    indices: tuple
    tol: float


def unit_simplex(n: int) -> Polytope:
    """The probability simplex {x >= 0, sum x = 1} as n rows -x_i <= 0 plus
    one equality row."""
    if n < 1:
        raise ValueError("simplex dimension must be >= 1")
    return Polytope(
        A=-np.eye(n),
        b=np.zeros(n),
        C=np.ones((1, n)),
        d=np.ones(1),
        diameter_hint=math.sqrt(2.0),
    )


def feasibility_violation(P: Polytope, x) -> float:
    """Worst constraint violation of x: max(0, max_i a_i.x - b_i,
    max_j |c_j.x - d_j|).  Zero iff x lies in P exactly."""
    x = np.asarray(x, dtype=float)
    if x.shape != (P.n,):
        raise ValueError(f"point has dimension {x.shape}, expected ({P.n},)")
    worst = 0.0
    if P.m1:
        worst = max(worst, float(np.max(P.A @ x - P.b)))
    if P.m2:
        worst = max(worst, float(np.max(np.abs(P.C @ x - P.d))))
    return max(0.0, worst)


def tight_set(P: Polytope, x, tol: float = ACTIVE_TOL) -> TightSet:
    """Indices of inequality rows with |b_i - a_i.x| <= tol.

    x must itself be feasible within tol.
    """
    x = np.asarray(x, dtype=float)
    if feasibility_violation(P, x) > tol:
        raise ValueError("tight_set queried at an infeasible point")
    if P.m1 == 0:
        return TightSet(indices=(), tol=tol)
    resid = P.b - P.A @ x
    idx = np.nonzero(np.abs(resid) <= tol)[0]
    return TightSet(indices=tuple(int(i) for i in idx), tol=tol)


def max_feasible_step(P: Polytope, x, direction, tol: float = ACTIVE_TOL) -> float:
    """Largest lambda with x + lambda*direction still in P (ratio test).

    Returns math.inf when no inequality row tightens along the direction.
    The direction must keep the equality rows satisfied (C dir = 0), which
    holds for any difference of feasible points.
    """
    x = np.asarray(x, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if x.shape != (P.n,) or direction.shape != (P.n,):
        raise ValueError("dimension mismatch in ratio test")
    if feasibility_violation(P, x) > max(tol, 1e-9):
        raise ValueError("ratio test from an infeasible point")
    if P.m2 and np.max(np.abs(P.C @ direction)) > 1e-8:
        raise ValueError("direction leaves the equality subspace")
    if P.m1 == 0:
        return math.inf
    rate = P.A @ direction
    slack = np.maximum(P.b - P.A @ x, 0.0)
    active = rate > RATIO_GUARD
    if not active.any():
        return math.inf
    return float(np.min(slack[active] / rate[active]))


def enumerate_vertices(P: Polytope, feas_tol: float = 1e-9,
                       max_bases: int = 10**6) -> VertexSet:
    """All vertices of P by brute-force basis enumeration.

    Every choice of n - m2 inequality rows is stacked on top of the equality
    rows; nonsingular systems are solved and feasible solutions kept, then
    deduplicated at pairwise distance DEDUP_TOL.  Intended as a test oracle
    and for small instances only; raises if the number of candidate bases
    exceeds ``max_bases``.
    """
    n, m1, m2 = P.n, P.m1, P.m2
    pick = n - m2
    if pick < 0:
        pick = 0
    if math.comb(m1 + m2, pick) > max_bases:
        raise ValueError("vertex enumeration would exceed the basis budget")

    found = []
    for rows in combinations(range(m1), pick):
        Msys = np.vstack([P.C, P.A[list(rows)]]) if rows else P.C.copy()
        rhs = np.concatenate([P.d, P.b[list(rows)]]) if rows else P.d.copy()
        if Msys.shape[0] != n:
            continue
        try:
            x = np.linalg.solve(Msys, rhs)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(x)):
            continue
        if np.max(np.abs(Msys @ x - rhs)) > 1e-8 * max(1.0, float(np.max(np.abs(rhs)))):
            continue
        if feasibility_violation(P, x) > feas_tol:
            continue
        if all(np.linalg.norm(x - v) > DEDUP_TOL for v in found):
            found.append(x)
    verts = np.array(found) if found else np.zeros((0, n))
    return VertexSet(vertices=verts)


def project_simplex(y) -> np.ndarray:
    """Euclidean projection of y onto the probability simplex.

    Sort-and-threshold: u_i = max(y_i - tau, 0) with tau chosen so that the
    coordinates sum to one; the output is renormalized so the sum is exact.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 1:
        raise ValueError("project_simplex expects a nonempty vector")
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, y.size + 1)
    rho = int(np.nonzero(u * j > css - 1.0)[0][-1])
    tau = (css[rho] - 1.0) / (rho + 1.0)
    out = np.maximum(y - tau, 0.0)
    return out / out.sum()


def check_nonempty(P: Polytope) -> bool:
    """Phase-1 feasibility check via the LP solver."""
    from .lp import LpProblem, solve_lp

    prob = LpProblem(
        objective=np.zeros(P.n),
        ineq_lhs=P.A,
        ineq_rhs=P.b,
        eq_lhs=P.C,
        eq_rhs=P.d,
        free_vars=frozenset(range(P.n)),
    )
    return solve_lp(prob).status == "optimal"


def read_polytope(source) -> Polytope:
    """Parse the polytope text format.

    Token stream after '#' comments are stripped: first ``n m1 m2``, then m1
    rows of A alongside b_i (n+1 reals each), then m2 rows of C alongside
    d_j.  Whitespace, including newlines, separates tokens.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    if len(tokens) < 3:
        raise ValueError("polytope file is missing the n m1 m2 header")
    n, m1, m2 = (int(t) for t in tokens[:3])
    need = 3 + (m1 + m2) * (n + 1)
    if len(tokens) != need:
        raise ValueError(f"polytope file has {len(tokens)} tokens, expected {need}")
    vals = np.array([float(t) for t in tokens[3:]]).reshape(m1 + m2, n + 1)
    return Polytope(A=vals[:m1, :n], b=vals[:m1, n],
                    C=vals[m1:, :n], d=vals[m1:, n])


def write_polytope(P: Polytope, target):
    """Write a polytope in the text format understood by read_polytope."""
    own = not hasattr(target, "write")
    fh = open(target, "w", encoding="utf-8") if own else target
    try:
        fh.write(f"{P.n} {P.m1} {P.m2}\n")
        for i in range(P.m1):
            row = " ".join(f"{v:.17g}" for v in P.A[i])
            fh.write(f"{row} {P.b[i]:.17g}\n")
        for j in range(P.m2):
            row = " ".join(f"{v:.17g}" for v in P.C[j])
            fh.write(f"{row} {P.d[j]:.17g}\n")
    finally:
        if own:
            fh.close()
