"""Shared builders for crafted test problems and random polytopes."""

import numpy as np
import pytest

from mofw import MultiobjectiveProblem, Polytope


def linear_problem(grads):
    """Objectives f_j(x) = g_j . x with constant gradients."""
    g = np.asarray(grads, dtype=float)
    return MultiobjectiveProblem(
        n=g.shape[1], m=g.shape[0],
        f=lambda x: g @ x, jac=lambda x: g.copy(),
        smoothness_L=1.0)


def target_problem(targets):
    """Objectives f_j(x) = 0.5 ||x - t_j||^2 (identity data matrix)."""
    t = np.atleast_2d(np.asarray(targets, dtype=float))
    return MultiobjectiveProblem(
        n=t.shape[1], m=t.shape[0],
        f=lambda x: 0.5 * np.sum((x - t) ** 2, axis=1),
        jac=lambda x: x - t,
        smoothness_L=1.0, strong_convexity_mu=1.0)


def vertex(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def random_bounded_polytope(rng, n):
    """Nonempty bounded polytope with at most 8 inequality rows.

    Either the unit simplex with up to two random cuts, or (n <= 3) the unit
    box with up to two cuts.  Cuts pass on the feasible side of a random
    interior point, so the region stays nonempty.
    """
    use_box = n <= 3 and rng.random() < 0.5
    if use_box:
        A = np.vstack([np.eye(n), -np.eye(n)])
        b = np.concatenate([np.ones(n), np.zeros(n)])
        C = np.zeros((0, n))
        d = np.zeros(0)
        interior = rng.uniform(0.2, 0.8, size=n)
        room = 2 * n
    else:
        A = -np.eye(n)
        b = np.zeros(n)
        C = np.ones((1, n))
        d = np.ones(1)
        w = rng.uniform(0.5, 1.5, size=n)
        interior = w / w.sum()
        room = n
    n_cuts = int(rng.integers(0, min(3, 9 - room)))
    for _ in range(n_cuts):
        a = rng.uniform(-1.0, 1.0, size=n)
        margin = rng.uniform(0.05, 0.5)
        A = np.vstack([A, a[None, :]])
        b = np.concatenate([b, [float(a @ interior) + margin]])
    return Polytope(A=A, b=b, C=C, d=d), interior


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
