"""Step-size rules: multiobjective adaptive backtracking, exact line search
on the max of the objectives, and Armijo for the projected-gradient solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class StepSizeError(RuntimeError):
    """Backtracking exhausted its budget; gradients and function values are
    likely inconsistent."""


@dataclass
class StepSizeState:
    """Running smoothness estimate with its shrink/grow factors.

    eta < 1 optimistically shrinks the estimate at the start of each call,
    tau > 1 grows it on every failed trial.  One state is owned by one
    solver run.
    """

    L_est: float
    eta: float = 0.9
    tau: float = 2.0

    def __post_init__(self):
        if not (0.0 < self.eta < 1.0 < self.tau):
            raise ValueError("need 0 < eta < 1 < tau")
        if self.L_est <= 0.0:
            raise ValueError("L_est must be positive")


@dataclass
class StepResult:
    lam: float
    L_out: float
    backtracks: int


def adaptive_step(prob, x, d, gap, lambda_max, state: StepSizeState,
                  max_backtracks: int = 100) -> StepResult:
    """Adaptive backtracking on the shared smoothness estimate.

    Starts from M = eta * L_est and the trial step
    lam = min(lambda_max, -gap / (M ||d||^2)), where gap = max_j <grad_j, d>
    must be negative.  While

        max_j [f_j(x + lam d) - f_j(x)] >= lam * gap + (lam^2 M / 2) ||d||^2

    the estimate is multiplied by tau and lam recomputed from the same
    formula.  Returns the accepted step and the final estimate M; the exit
    inequality above holds at (lam, M) with strict inequality.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if gap >= 0.0:
        raise ValueError("adaptive_step needs a descent direction (gap < 0)")
    nd2 = float(d @ d)
    if nd2 <= 0.0:
        raise ValueError("adaptive_step needs a nonzero direction")
    if lambda_max <= 0.0:
        raise ValueError("lambda_max must be positive")

    f0 = prob.evaluate(x)
    # Below this, objective differences are indistinguishable from roundoff
    # and the sufficient-decrease comparison turns into a coin flip; the rule
    # is known to break down once high accuracy is demanded, so a trial whose
    # whole model improvement sits under the noise floor is accepted.
    noise = 1e-12 * max(1.0, float(np.max(np.abs(f0))))
    M = state.eta * state.L_est
    backtracks = 0
    while True:
        lam = min(lambda_max, -gap / (M * nd2))
        model = lam * gap + 0.5 * lam * lam * M * nd2
        decrease = float(np.max(prob.evaluate(x + lam * d) - f0))
        if decrease < model or -model <= noise:
            return StepResult(lam=lam, L_out=M, backtracks=backtracks)
        M *= state.tau
        backtracks += 1
        if backtracks > max_backtracks:
            raise StepSizeError(
                f"no acceptable step after {max_backtracks} backtracks")


def exact_line_search(prob, x, d, lambda_max, rel_width: float = 1e-10) -> float:
    """Golden-section minimization of max_j f_j(x + lam d) on [0, lambda_max].

    Assumes the section function is convex on the interval, so golden
    section converges to the global minimizer (possibly an endpoint).
    Comparison-based search localizes a smooth minimum only to about
    sqrt(machine eps), so a parabolic fit on a wider stencil polishes the
    result; the fit is kept only when it does not measurably worsen the
    section value, which rejects it at kink minima.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if not np.isfinite(lambda_max) or lambda_max < 0.0:
        raise ValueError("exact_line_search needs a finite nonnegative cap")

    def phi(lam):
        return float(np.max(prob.evaluate(x + lam * d)))

    lo, hi = 0.0, float(lambda_max)
    width_goal = rel_width * max(1.0, lambda_max)
    a = hi - GOLDEN * (hi - lo)
    b = lo + GOLDEN * (hi - lo)
    fa, fb = phi(a), phi(b)
    while hi - lo > width_goal:
        if fa <= fb:
            hi, b, fb = b, a, fa
            a = hi - GOLDEN * (hi - lo)
            fa = phi(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + GOLDEN * (hi - lo)
            fb = phi(b)
    best = 0.5 * (lo + hi)

    h = 1e-4 * max(1.0, lambda_max)
    if lambda_max < 2 * h:
        return best
    mid = min(max(best, h), lambda_max - h)
    f1, f2, f3 = phi(mid - h), phi(mid), phi(mid + h)
    denom = f1 - 2.0 * f2 + f3
    if denom <= 0.0:
        return best
    cand = mid + 0.5 * h * (f1 - f3) / denom
    cand = min(max(cand, 0.0), float(lambda_max))
    f_best = phi(best)
    if phi(cand) <= f_best + 1e-12 * max(1.0, abs(f_best)):
        return cand
    return best


def armijo_step(prob, x, d, beta: float = 0.5, c: float = 1e-4,
                lambda0: float = 1.0, max_halvings: int = 60) -> float:
    """Largest lam in {lambda0 * beta^k} with
    max_j [f_j(x + lam d) - f_j(x)] <= c * lam * max_j <grad_j, d>."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    gap = float(np.max(prob.jacobian(x) @ d))
    if gap >= 0.0:
        raise ValueError("armijo_step needs a descent direction (gap < 0)")
    f0 = prob.evaluate(x)
    lam = float(lambda0)
    for _ in range(max_halvings + 1):
        if float(np.max(prob.evaluate(x + lam * d) - f0)) <= c * lam * gap:
            return lam
        lam *= beta
    raise StepSizeError(f"Armijo rejected {max_halvings} halvings")
