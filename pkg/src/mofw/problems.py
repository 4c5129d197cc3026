"""Multiobjective problems: generic interface, random least-squares family,
and the scalar gap min_j [f_j(x) - f_j(z)] that drives the solvers.

Only smooth convex quadratics ship, but everything downstream talks to
MultiobjectiveProblem so other objective families can be plugged in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

_MASK64 = (1 << 64) - 1


class PowerIterationError(RuntimeError):
    """Power iteration failed to converge within its iteration cap."""


def _splitmix64(seed: int, count: int) -> np.ndarray:
    """``count`` uniform floats in [0, 1) from the splitmix64 generator.

    State update: s += 0x9E3779B97F4A7C15 (mod 2^64); output mixing
    z ^= z>>30, z *= 0xBF58476D1CE4E5B9; z ^= z>>27, z *= 0x94D049BB133111EB;
    z ^= z>>31; the top 53 bits scaled by 2^-53 give the float.  The whole
    stream is a pure function of ``seed``, so instances are reproducible in
    any language.
    """
    s = int(seed) & _MASK64
    out = np.empty(count)
    for i in range(count):
        s = (s + 0x9E3779B97F4A7C15) & _MASK64
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z = z ^ (z >> 31)
        out[i] = (z >> 11) * 2.0**-53
    return out


def power_iteration(H: np.ndarray, rel_tol: float = 1e-8,
                    max_iter: int = 20000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    n = H.shape[0]
    v = np.ones(n) / np.sqrt(n)
    v[0] += 1e-6          # avoid starting exactly orthogonal to the top space
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = H @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        lam_new = float(v @ (H @ v))
        if abs(lam_new - lam) <= rel_tol * max(1.0, abs(lam_new)):
            return lam_new
        lam = lam_new
    raise PowerIterationError(
        "power iteration did not converge; matrix may be ill-conditioned")


@dataclass
class MultiobjectiveProblem:
    """m smooth objectives on R^n with a shared smoothness bound.

    ``f`` maps x to the m-vector of objective values, ``jac`` to the m x n
    matrix whose rows are the gradients.  ``smoothness_L`` bounds every
    objective's gradient Lipschitz constant; ``strong_convexity_mu`` is the
    common strong-convexity constant when one is known.
    """

    n: int
    m: int
    f: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]
    smoothness_L: float
    strong_convexity_mu: float | None = None

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.n},)")
        vals = np.asarray(self.f(x), dtype=float)
        if vals.shape != (self.m,):
            raise ValueError("objective callable returned the wrong shape")
        return vals

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.n},)")
        J = np.asarray(self.jac(x), dtype=float)
        if J.shape != (self.m, self.n):
            raise ValueError("jacobian callable returned the wrong shape")
        return J

    def sigma(self, x, z) -> float:
        """min_j [f_j(x) - f_j(z)], the scalar optimality gap."""
        return float(np.min(self.evaluate(x) - self.evaluate(z)))


def gap_sigma(prob: MultiobjectiveProblem, x, z) -> float:
    return prob.sigma(x, z)


@dataclass
class QuadraticInstance:
    """Least-squares family f_j(x) = 0.5 ||G x - t_j||^2, j = 1..m.

    G is p x n, targets are stored as an m x p array.  Gradients are
    G^T (G x - t_j); the common smoothness constant is lambda_max(G^T G) and,
    when G has full column rank, lambda_min(G^T G) > 0 is a strong-convexity
    constant shared by every objective.
    """

    G: np.ndarray
    targets: np.ndarray
    seed: int

    def __post_init__(self):
        self.G = np.asarray(self.G, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if self.G.ndim != 2 or self.targets.ndim != 2:
            raise ValueError("G and targets must be 2-d arrays")
        if self.targets.shape[1] != self.G.shape[0]:
            raise ValueError("targets must live in R^p")
        self._gram = None

    @property
    def p(self):
        return self.G.shape[0]

    @property
    def n(self):
        return self.G.shape[1]

    @property
    def m(self):
        return self.targets.shape[0]

    def _gram_matrix(self):
        if self._gram is None:
            self._gram = self.G.T @ self.G
        return self._gram

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.n},)")
        resid = self.G @ x - self.targets        # (m, p) by broadcasting
        return 0.5 * np.sum(resid * resid, axis=1)

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.n},)")
        return (self.G @ x - self.targets) @ self.G

    def smoothness_bound(self) -> float:
        """lambda_max(G^T G) to relative tolerance 1e-8 by power iteration."""
        return power_iteration(self._gram_matrix())

    def strong_convexity(self, rank_tol: float = 1e-10) -> float | None:
        """lambda_min(G^T G) when G has full column rank, else None."""
        lam_min = float(np.linalg.eigvalsh(self._gram_matrix())[0])
        return lam_min if lam_min > rank_tol else None

    def as_problem(self) -> MultiobjectiveProblem:
        return MultiobjectiveProblem(
            n=self.n,
            m=self.m,
            f=self.evaluate,
            jac=self.jacobian,
            smoothness_L=self.smoothness_bound(),
            strong_convexity_mu=self.strong_convexity(),
        )


def make_quadratic(p: int, n: int, m: int, seed: int) -> QuadraticInstance:
    """Random instance with G columns and targets i.i.d. uniform on [0, 1].

    Draw order is fixed: the n columns of G first (p values each), then the
    m targets (p values each), all from one splitmix64 stream seeded by
    ``seed``.  Identical seeds give bit-identical instances.
    """
    if min(p, n, m) < 1:
        raise ValueError("p, n, m must all be >= 1")
    draws = _splitmix64(seed, p * n + p * m)
    G = draws[: p * n].reshape(n, p).T
    targets = draws[p * n:].reshape(m, p)
    return QuadraticInstance(G=G, targets=targets, seed=int(seed))


def save_instance(inst: QuadraticInstance, target):
    """Text serialization: header ``p n m seed``, then the p rows of G, then
    the m target vectors."""
    own = not hasattr(target, "write")
    fh = open(target, "w", encoding="utf-8") if own else target
    try:
        fh.write(f"{inst.p} {inst.n} {inst.m} {inst.seed}\n")
        for row in inst.G:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
        for t in inst.targets:
            fh.write(" ".join(f"{v:.17g}" for v in t) + "\n")
    finally:
        if own:
            fh.close()


def load_instance(source) -> QuadraticInstance:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    tokens = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    p, n, m, seed = (int(t) for t in tokens[:4])
    need = 4 + p * n + m * p
    if len(tokens) != need:
        raise ValueError(f"instance file has {len(tokens)} tokens, expected {need}")
    vals = np.array([float(t) for t in tokens[4:]])
    G = vals[: p * n].reshape(p, n)
    targets = vals[p * n:].reshape(m, p)
    return QuadraticInstance(G=G, targets=targets, seed=seed)
