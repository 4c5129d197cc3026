"""Search-direction subproblems at an iterate.

The min-max subproblems are linear once the max over objectives is lifted
into an epigraph variable t, so both the toward-point and the pairwise
two-point subproblem are solved with the dense simplex solver.  The
pairwise subproblem restricts its away point to the inequality rows that
are tight at the iterate, which is what makes the direction safe to follow
without any explicit convex decomposition of the iterate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ACTIVE_TOL, Polytope, VertexSet, feasibility_violation, \
    project_simplex, tight_set
from .lp import LpProblem, solve_lp


class SubproblemError(RuntimeError):
    """The direction LP failed: infeasible or unbounded feasible region."""


class DualAscentError(RuntimeError):
    """The projected-gradient inner solve missed its duality-gap target."""


@dataclass
class DirectionResult:
    """A search direction with the subproblem value that produced it.

    kind 'fw':       dir = toward - x, theta is the toward-point gap.
    kind 'pairwise': dir = toward - away, theta is the two-point gap.
    kind 'away':     dir = x - away (vertex-set solver only).
    kind 'pg':       toward is the prox point, theta its model value.
    """

    kind: str
    dir: np.ndarray
    theta: float
    toward: np.ndarray
    away: np.ndarray | None = None


@dataclass
class AfwStep:
    """Outcome of the away-step direction choice over a vertex set."""

    direction: DirectionResult
    lambda_max: float
    theta_fw: float
    toward_index: int
    away_index: int | None


def _check_feasible(P, x, tol):
    if feasibility_violation(P, x) > max(tol, 1e-8):
        raise ValueError("direction subproblem queried at an infeasible point")


def _solve_direction_lp(prob_lp, what):
    sol = solve_lp(prob_lp)
    if sol.status == "infeasible":
        raise SubproblemError(f"{what} LP infeasible; polytope data look corrupt")
    if sol.status == "unbounded":
        raise SubproblemError(
            f"{what} LP unbounded; the feasible region must be bounded")
    return sol


def fw_direction(prob, P: Polytope, x) -> DirectionResult:
    """Toward-point subproblem min_u max_j <grad_j, u - x> over P.

    Epigraph form in (u, t): minimize t subject to grad_j . u - t <= grad_j . x
    for every objective plus the polytope rows on u; all variables free.
    The optimal value is the gap theta <= 0, zero exactly at weak Pareto
    points.
    """
    x = np.asarray(x, dtype=float)
    _check_feasible(P, x, ACTIVE_TOL)
    J = prob.jacobian(x)
    m, n = J.shape

    c = np.zeros(n + 1)
    c[n] = 1.0
    ineq_lhs = np.zeros((m + P.m1, n + 1))
    ineq_lhs[:m, :n] = J
    ineq_lhs[:m, n] = -1.0
    ineq_lhs[m:, :n] = P.A
    ineq_rhs = np.concatenate([J @ x, P.b])
    eq_lhs = np.zeros((P.m2, n + 1))
    eq_lhs[:, :n] = P.C
    sol = _solve_direction_lp(
        LpProblem(objective=c, ineq_lhs=ineq_lhs, ineq_rhs=ineq_rhs,
                  eq_lhs=eq_lhs, eq_rhs=P.d,
                  free_vars=frozenset(range(n + 1))),
        "toward-point")
    u = sol.z[:n]
    return DirectionResult(kind="fw", dir=u - x, theta=float(sol.value),
                           toward=u)


def pairwise_direction(prob, P: Polytope, x, tol: float = ACTIVE_TOL) -> DirectionResult:
    """Two-point subproblem min_{u,v} max_j <grad_j, u - v> over P x P,
    with the away point v pinned to every inequality row tight at x.

    Pinning the tight rows onto v keeps x + lam (u - v) feasible for every
    lam up to the ratio test: v carries the active rows with equality while
    u satisfies them, so they cannot be crossed.  Epigraph form in
    (u, v, t), all free.
    """
    x = np.asarray(x, dtype=float)
    _check_feasible(P, x, tol)
    J = prob.jacobian(x)
    m, n = J.shape
    tight = tight_set(P, x, tol)

    k = 2 * n + 1
    c = np.zeros(k)
    c[2 * n] = 1.0
    ineq_lhs = np.zeros((m + 2 * P.m1, k))
    ineq_lhs[:m, :n] = J
    ineq_lhs[:m, n:2 * n] = -J
    ineq_lhs[:m, 2 * n] = -1.0
    ineq_lhs[m:m + P.m1, :n] = P.A
    ineq_lhs[m + P.m1:, n:2 * n] = P.A
    ineq_rhs = np.concatenate([np.zeros(m), P.b, P.b])

    rows = list(tight.indices)
    eq_lhs = np.zeros((2 * P.m2 + len(rows), k))
    eq_lhs[:P.m2, :n] = P.C
    eq_lhs[P.m2:2 * P.m2, n:2 * n] = P.C
    eq_rhs = np.concatenate([P.d, P.d, P.b[rows]])
    if rows:
        eq_lhs[2 * P.m2:, n:2 * n] = P.A[rows]

    sol = _solve_direction_lp(
        LpProblem(objective=c, ineq_lhs=ineq_lhs, ineq_rhs=ineq_rhs,
                  eq_lhs=eq_lhs, eq_rhs=eq_rhs,
                  free_vars=frozenset(range(k))),
        "pairwise")
    u = sol.z[:n]
    v = sol.z[n:2 * n]
    return DirectionResult(kind="pairwise", dir=u - v, theta=float(sol.value),
                           toward=u, away=v)


def afw_direction(prob, V: VertexSet, active, x) -> AfwStep:
    """Away-step choice over an explicit vertex set.

    The toward atom minimizes max_j <grad_j, a - x> over all vertices, the
    away atom maximizes min_j <grad_j, a - x> over the atoms currently
    carrying weight.  The better of the two directions is returned, ties
    going to the toward step; the away step is capped at w/(1-w) so the
    away atom's weight cannot go negative.
    """
    x = np.asarray(x, dtype=float)
    active = np.asarray(active, dtype=float)
    verts = V.vertices
    if active.shape != (len(V),):
        raise ValueError("active weights must align with the vertex set")
    if np.any(active < -1e-12):
        raise ValueError("active weights must be nonnegative")
    if abs(active.sum() - 1.0) > 1e-8:
        raise ValueError("active weights must sum to one")
    if np.linalg.norm(verts.T @ active - x) > 1e-8:
        raise ValueError("active weights do not reproduce the iterate")

    J = prob.jacobian(x)
    scores = J @ (verts - x).T          # (m, |V|)
    fw_vals = scores.max(axis=0)
    s_idx = int(np.argmin(fw_vals))
    theta_fw = float(fw_vals[s_idx])

    support = np.nonzero(active > 0.0)[0]
    if support.size == 0:
        raise ValueError("empty active set")
    min_vals = scores.min(axis=0)
    v_idx = int(support[np.argmax(min_vals[support])])
    theta_away = -float(min_vals[v_idx])

    if theta_fw <= theta_away:
        toward = verts[s_idx]
        res = DirectionResult(kind="fw", dir=toward - x, theta=theta_fw,
                              toward=toward)
        return AfwStep(direction=res, lambda_max=1.0, theta_fw=theta_fw,
                       toward_index=s_idx, away_index=None)
    w = float(active[v_idx])
    away = verts[v_idx]
    res = DirectionResult(kind="away", dir=x - away, theta=theta_away,
                          toward=verts[s_idx], away=away)
    return AfwStep(direction=res, lambda_max=w / (1.0 - w), theta_fw=theta_fw,
                   toward_index=s_idx, away_index=v_idx)


def pg_direction(prob, x, inner_tol: float = 1e-8,
                 max_inner: int = 4000) -> DirectionResult:
    """Prox subproblem min_u max_j <grad_j, u - x> + 0.5 ||u - x||^2 over the
    probability simplex, solved through its dual.

    For fixed weights w on the objectives the inner minimizer is the simplex
    projection of x - J^T w, so the dual is maximized by projected gradient
    ascent on w with step 1/(1 + ||J||^2).  The duality gap
    max_j <grad_j, u - x> - w . J (u - x) is driven below ``inner_tol``;
    exceeding ``max_inner`` sweeps raises DualAscentError with the achieved
    gap.  The default cap leaves ample room: the ascent is linearly
    convergent but its rate degrades when objective gradients align.
    """
    x = np.asarray(x, dtype=float)
    J = prob.jacobian(x)
    m = J.shape[0]
    step = 1.0 / (1.0 + np.linalg.norm(J, 2) ** 2)
    w = np.full(m, 1.0 / m)

    gap = np.inf
    for _ in range(max_inner):
        u = project_simplex(x - J.T @ w)
        du = u - x
        margins = J @ du
        quad = 0.5 * float(du @ du)
        primal = float(margins.max()) + quad
        gap = float(margins.max() - w @ margins)
        if gap <= inner_tol:
            return DirectionResult(kind="pg", dir=u - x, theta=primal,
                                   toward=u)
        w = project_simplex(w + step * margins)
    raise DualAscentError(
        f"dual ascent stalled at duality gap {gap:.3e} after {max_inner} "
        f"sweeps (target {inner_tol:.1e})")
