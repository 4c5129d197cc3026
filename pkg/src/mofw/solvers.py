"""The four solver loops with shared tracing and step classification.

run_dipfw follows the pairwise direction computed from the tight rows of
the current iterate (no convex decomposition is maintained), run_fw is the
classical toward-point method, run_afw keeps an explicit weight vector over
a vertex set, and run_pg is the projected-gradient comparator on the
probability simplex.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .directions import AfwStep, afw_direction, fw_direction, \
    pairwise_direction, pg_direction
from .geometry import Polytope, VertexSet, feasibility_violation, \
    max_feasible_step
from .stepsize import StepSizeState, adaptive_step, armijo_step, \
    exact_line_search

ZERO_DIR_TOL = 1e-12


class SolverError(RuntimeError):
    """Internal consistency failure inside a solver loop."""


@dataclass
class SolverConfig:
    """Shared knobs for all solver loops.

    stop_mode 'pairwise_gap' stops run_dipfw when the pairwise gap has
    shrunk to -eps, which implies the toward-point criterion; 'fw_gap'
    additionally solves the toward-point LP every iteration and stops on
    |theta_fw| <= eps.  L0 seeds the adaptive smoothness estimate and
    defaults to the problem's own bound.
    """

    eps: float = 1e-4
    max_iter: int = 20000
    step_mode: str = "adaptive"        # 'adaptive' | 'exact_line_search'
    stop_mode: str = "pairwise_gap"    # 'pairwise_gap' | 'fw_gap'
    eta: float = 0.9
    tau: float = 2.0
    L0: float | None = None
    active_tol: float = 1e-9

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.step_mode not in ("adaptive", "exact_line_search"):
            raise ValueError(f"unknown step_mode {self.step_mode!r}")
        if self.stop_mode not in ("pairwise_gap", "fw_gap"):
            raise ValueError(f"unknown stop_mode {self.stop_mode!r}")


@dataclass
class IterateRecord:
    """One solver step.  theta_pw is filled by the pairwise solver,
    theta_fw by whichever solver computes a toward-point (or model) gap.
    x, direction and L_out are diagnostics used by the invariant tests and
    are not part of the CSV interface."""

    k: int
    theta_pw: float | None
    theta_fw: float | None
    lam: float
    lam_max: float
    step_class: str
    objectives: np.ndarray
    elapsed_ns: int
    backtracks: int
    x: np.ndarray | None = None
    direction: np.ndarray | None = None
    L_out: float | None = None


@dataclass
class SolverTrace:
    solver_id: str
    records: list
    final_x: np.ndarray
    final_objectives: np.ndarray
    status: str                        # 'converged' | 'iter_cap' | 'error'
    final_gap: float | None = None
    message: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def iterations(self):
        return len(self.records)


def classify_step(lam: float, lam_max: float) -> str:
    """'bad' iff the step hit the feasibility cap, else 'good'.

    A capped step means some inequality row became tight, which is what
    bounds the number of consecutive bad steps by the dimension.
    """
    if not (0.0 <= lam <= lam_max):
        raise ValueError("need 0 <= lam <= lam_max")
    return "bad" if lam == lam_max else "good"


def _default_x0(prob, P=None):
    n = prob.n
    return np.full(n, 1.0 / n)


def _check_start(P, x0, tol):
    if feasibility_violation(P, x0) > max(tol, 1e-9):
        raise ValueError("x0 is not feasible; provide a feasible start point")


def _make_state(prob, cfg):
    L0 = cfg.L0 if cfg.L0 is not None else max(prob.smoothness_L, 1e-12)
    return StepSizeState(L_est=L0, eta=cfg.eta, tau=cfg.tau)


def _take_step(prob, x, d, gap, lam_max, cfg, state):
    """Returns (lam, L_out, backtracks) under the configured step rule."""
    if cfg.step_mode == "adaptive":
        res = adaptive_step(prob, x, d, gap, lam_max, state)
        state.L_est = res.L_out
        return res.lam, res.L_out, res.backtracks
    lam = exact_line_search(prob, x, d, lam_max)
    # Golden section cannot land exactly on the cap; snap within resolution.
    if lam_max - lam <= 2e-10 * max(1.0, lam_max):
        lam = lam_max
    return lam, None, 0


def run_dipfw(prob, P: Polytope, x0=None, cfg: SolverConfig | None = None) -> SolverTrace:
    """Pairwise solver on an H-representation polytope.

    Per iteration: solve the pairwise subproblem at x, stop once the
    configured gap criterion holds, otherwise run the ratio test for the
    largest feasible step, choose the step length, and move.  A step is
    classified bad when it hits the ratio-test cap.
    """
    cfg = cfg or SolverConfig()
    x = np.asarray(x0, dtype=float) if x0 is not None else _default_x0(prob, P)
    _check_start(P, x, cfg.active_tol)
    state = _make_state(prob, cfg)
    t0 = time.perf_counter_ns()
    records = []
    status = "iter_cap"
    final_gap = None
    for k in range(cfg.max_iter):
        res = pairwise_direction(prob, P, x, tol=cfg.active_tol)
        theta_pw = res.theta
        theta_fw = None
        if cfg.stop_mode == "pairwise_gap":
            final_gap = theta_pw
            if theta_pw >= -cfg.eps:
                status = "converged"
                break
        else:
            theta_fw = fw_direction(prob, P, x).theta
            final_gap = theta_fw
            if abs(theta_fw) <= cfg.eps:
                status = "converged"
                break
        d = res.dir
        if float(np.linalg.norm(d)) <= ZERO_DIR_TOL:
            status = "converged"
            break
        lam_max = max_feasible_step(P, x, d, tol=max(cfg.active_tol, 1e-9))
        if math.isinf(lam_max):
            cap = P.diameter_hint if P.diameter_hint else 1e6
            lam_max = cap / float(np.linalg.norm(d))
        gap = float(np.max(prob.jacobian(x) @ d))
        if gap >= 0.0:
            status = "converged"       # numerically stationary
            break
        lam, L_out, backtracks = _take_step(prob, x, d, gap, lam_max, cfg, state)
        records.append(IterateRecord(
            k=k, theta_pw=theta_pw, theta_fw=theta_fw, lam=lam,
            lam_max=lam_max, step_class=classify_step(lam, lam_max),
            objectives=prob.evaluate(x),
            elapsed_ns=time.perf_counter_ns() - t0, backtracks=backtracks,
            x=x.copy(), direction=d.copy(), L_out=L_out))
        x = x + lam * d
    return SolverTrace(solver_id="dipfw", records=records, final_x=x,
                       final_objectives=prob.evaluate(x), status=status,
                       final_gap=final_gap)


def run_fw(prob, P: Polytope, x0=None, cfg: SolverConfig | None = None) -> SolverTrace:
    """Classical toward-point solver: direction toward the subproblem
    solution, cap lambda_max = 1, stop on |theta_fw| <= eps."""
    cfg = cfg or SolverConfig()
    x = np.asarray(x0, dtype=float) if x0 is not None else _default_x0(prob, P)
    _check_start(P, x, cfg.active_tol)
    state = _make_state(prob, cfg)
    t0 = time.perf_counter_ns()
    records = []
    status = "iter_cap"
    final_gap = None
    for k in range(cfg.max_iter):
        res = fw_direction(prob, P, x)
        final_gap = res.theta
        if abs(res.theta) <= cfg.eps:
            status = "converged"
            break
        d = res.dir
        if float(np.linalg.norm(d)) <= ZERO_DIR_TOL:
            status = "converged"
            break
        gap = float(np.max(prob.jacobian(x) @ d))
        if gap >= 0.0:
            status = "converged"
            break
        lam, L_out, backtracks = _take_step(prob, x, d, gap, 1.0, cfg, state)
        records.append(IterateRecord(
            k=k, theta_pw=None, theta_fw=res.theta, lam=lam, lam_max=1.0,
            step_class=classify_step(lam, 1.0), objectives=prob.evaluate(x),
            elapsed_ns=time.perf_counter_ns() - t0, backtracks=backtracks,
            x=x.copy(), direction=d.copy(), L_out=L_out))
        x = x + lam * d
    return SolverTrace(solver_id="fw", records=records, final_x=x,
                       final_objectives=prob.evaluate(x), status=status,
                       final_gap=final_gap)


def run_afw(prob, V: VertexSet, x0=None, active0=None,
            cfg: SolverConfig | None = None) -> SolverTrace:
    """Away-step solver over an explicit vertex set.

    Maintains the convex decomposition of the iterate as a weight vector
    over V.  A toward step scales all weights by (1 - lam) and adds lam to
    the toward atom, an away step scales by (1 + lam) and subtracts lam
    from the away atom; atoms whose weight falls below 1e-12 are dropped.
    If the chosen branch offers no descent the run stops with status
    'error' (the vertex-restricted gap cannot certify progress there).
    """
    cfg = cfg or SolverConfig()
    verts = V.vertices
    if x0 is None and active0 is not None:
        weights = np.asarray(active0, dtype=float).copy()
        x = verts.T @ weights
    elif x0 is None:
        x = verts[0].copy()
        weights = np.zeros(len(V))
        weights[0] = 1.0
    else:
        x = np.asarray(x0, dtype=float)
        if active0 is not None:
            weights = np.asarray(active0, dtype=float).copy()
        else:
            hits = np.nonzero(np.linalg.norm(verts - x, axis=1) <= 1e-10)[0]
            if hits.size == 0:
                raise ValueError("x0 is not a vertex; pass active0 weights")
            weights = np.zeros(len(V))
            weights[hits[0]] = 1.0
    state = _make_state(prob, cfg)
    t0 = time.perf_counter_ns()
    records = []
    status = "iter_cap"
    message = ""
    final_gap = None
    weight_sum_dev = 0.0
    for k in range(cfg.max_iter):
        step: AfwStep = afw_direction(prob, V, weights, x)
        final_gap = step.theta_fw
        if abs(step.theta_fw) <= cfg.eps:
            status = "converged"
            break
        d = step.direction.dir
        if float(np.linalg.norm(d)) <= ZERO_DIR_TOL:
            status = "converged"
            break
        gap = float(np.max(prob.jacobian(x) @ d))
        if gap >= 0.0:
            status = "error"
            message = ("no descent among the active atoms; the "
                       "vertex-restricted gap is stuck at "
                       f"{step.theta_fw:.3e}")
            break
        lam, L_out, backtracks = _take_step(prob, x, d, gap, step.lambda_max,
                                            cfg, state)
        records.append(IterateRecord(
            k=k, theta_pw=None, theta_fw=step.theta_fw, lam=lam,
            lam_max=step.lambda_max,
            step_class=classify_step(lam, step.lambda_max),
            objectives=prob.evaluate(x),
            elapsed_ns=time.perf_counter_ns() - t0, backtracks=backtracks,
            x=x.copy(), direction=d.copy(), L_out=L_out))
        if step.direction.kind == "fw":
            weights *= (1.0 - lam)
            weights[step.toward_index] += lam
        else:
            weights *= (1.0 + lam)
            weights[step.away_index] -= lam
        weights[weights <= 1e-12] = 0.0
        total = weights.sum()
        weight_sum_dev = max(weight_sum_dev, abs(total - 1.0))
        if abs(total - 1.0) > 1e-6:
            raise SolverError(f"active weights drifted to sum {total}")
        weights /= total
        x = x + lam * d
        if np.linalg.norm(verts.T @ weights - x) > 1e-6:
            raise SolverError("weight bookkeeping no longer matches the iterate")
    return SolverTrace(solver_id="afw", records=records, final_x=x,
                       final_objectives=prob.evaluate(x), status=status,
                       final_gap=final_gap, message=message,
                       diagnostics={"weight_sum_dev": weight_sum_dev})


def run_pg(prob, x0=None, cfg: SolverConfig | None = None,
           inner_tol: float = 1e-8, max_inner: int = 4000) -> SolverTrace:
    """Projected-gradient comparator on the probability simplex.

    Per iteration the prox subproblem gives the point p(x); the run stops
    when 0.5 ||p(x) - x||^2 < eps and otherwise moves along p(x) - x with
    an Armijo step.
    """
    cfg = cfg or SolverConfig()
    x = np.asarray(x0, dtype=float) if x0 is not None else _default_x0(prob)
    t0 = time.perf_counter_ns()
    records = []
    status = "iter_cap"
    final_gap = None
    for k in range(cfg.max_iter):
        res = pg_direction(prob, x, inner_tol=inner_tol, max_inner=max_inner)
        d = res.dir
        half_sq = 0.5 * float(d @ d)
        final_gap = half_sq
        if half_sq < cfg.eps:
            status = "converged"
            break
        lam = armijo_step(prob, x, d)
        halvings = 0 if lam >= 1.0 else int(round(math.log(lam, 0.5)))
        records.append(IterateRecord(
            k=k, theta_pw=None, theta_fw=res.theta, lam=lam, lam_max=1.0,
            step_class=classify_step(lam, 1.0), objectives=prob.evaluate(x),
            elapsed_ns=time.perf_counter_ns() - t0, backtracks=halvings,
            x=x.copy(), direction=d.copy(), L_out=None))
        x = x + lam * d
    return SolverTrace(solver_id="pg", records=records, final_x=x,
                       final_objectives=prob.evaluate(x), status=status,
                       final_gap=final_gap)


def write_trace_csv(trace: SolverTrace, target):
    """Trace CSV: one row per iteration, a trailing comment with the final
    status.  Columns: k, theta_pw, theta_fw, lambda, lambda_max, step_class,
    backtracks, elapsed_ns, f_1..f_m."""
    m = len(trace.final_objectives)
    own = not hasattr(target, "write")
    fh = open(target, "w", encoding="utf-8", newline="") if own else target

    def fmt(v):
        return "" if v is None else f"{v:.17g}"

    try:
        cols = ["k", "theta_pw", "theta_fw", "lambda", "lambda_max",
                "step_class", "backtracks", "elapsed_ns"]
        cols += [f"f_{j + 1}" for j in range(m)]
        fh.write(",".join(cols) + "\n")
        for r in trace.records:
            row = [str(r.k), fmt(r.theta_pw), fmt(r.theta_fw), fmt(r.lam),
                   fmt(r.lam_max), r.step_class, str(r.backtracks),
                   str(r.elapsed_ns)]
            row += [f"{v:.17g}" for v in r.objectives]
            fh.write(",".join(row) + "\n")
        gap = "" if trace.final_gap is None else f"{trace.final_gap:.17g}"
        fh.write(f"# status={trace.status} solver={trace.solver_id} "
                 f"iterations={trace.iterations} final_gap={gap}\n")
    finally:
        if own:
            fh.close()
