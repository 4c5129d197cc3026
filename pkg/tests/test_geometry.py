import io
import math

import numpy as np
import pytest

from mofw import (Polytope, enumerate_vertices, feasibility_violation,
                  max_feasible_step, project_simplex, read_polytope,
                  tight_set, unit_simplex, write_polytope)
from mofw.geometry import check_nonempty

from conftest import random_bounded_polytope


def test_unit_simplex_structure():
    P = unit_simplex(2)
    assert np.array_equal(P.A, [[-1.0, 0.0], [0.0, -1.0]])
    assert np.array_equal(P.b, [0.0, 0.0])
    assert np.array_equal(P.C, [[1.0, 1.0]])
    assert np.array_equal(P.d, [1.0])
    assert P.diameter_hint == pytest.approx(math.sqrt(2))


def test_unit_simplex_degenerate_point():
    V = enumerate_vertices(unit_simplex(1))
    assert len(V) == 1
    assert V.vertices[0] == pytest.approx([1.0])


def test_unit_simplex_vertices_are_unit_vectors():
    V = enumerate_vertices(unit_simplex(3))
    got = sorted(tuple(np.round(v, 12)) for v in V)
    assert got == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_simplex_rejects_bad_dimension():
    with pytest.raises(ValueError):
        unit_simplex(0)


def test_feasibility_violation_values():
    P = unit_simplex(2)
    assert feasibility_violation(P, [0.5, 0.5]) == 0.0
    assert feasibility_violation(P, [0.6, 0.6]) == pytest.approx(0.2)
    assert feasibility_violation(P, [1.1, -0.1]) == pytest.approx(0.1)


def test_feasibility_violation_dimension_mismatch():
    with pytest.raises(ValueError):
        feasibility_violation(unit_simplex(2), [1.0, 0.0, 0.0])


def test_tight_set_examples():
    assert tight_set(unit_simplex(2), [1.0, 0.0]).indices == (1,)
    assert tight_set(unit_simplex(2), [0.5, 0.5]).indices == ()
    assert tight_set(unit_simplex(3), [0.5, 0.5, 0.0]).indices == (2,)


def test_tight_set_rejects_infeasible_point():
    with pytest.raises(ValueError):
        tight_set(unit_simplex(2), [0.7, 0.7])


def test_tight_set_shrinking_tol_never_adds(rng):
    P = unit_simplex(5)
    for _ in range(50):
        x = rng.dirichlet(np.ones(5))
        x[x < 0.05] = 0.0
        x /= x.sum()
        wide = set(tight_set(P, x, tol=1e-6).indices)
        narrow = set(tight_set(P, x, tol=1e-12).indices)
        assert narrow <= wide


def test_max_feasible_step_examples():
    P = unit_simplex(2)
    assert max_feasible_step(P, [0.5, 0.5], [0.5, -0.5]) == pytest.approx(1.0)
    assert max_feasible_step(P, [0.5, 0.5], [1.0, -1.0]) == pytest.approx(0.5)
    assert max_feasible_step(P, [0.5, 0.5], [0.0, 0.0]) == math.inf


def test_max_feasible_step_preconditions():
    P = unit_simplex(2)
    with pytest.raises(ValueError):
        max_feasible_step(P, [0.7, 0.7], [1.0, -1.0])   # infeasible point
    with pytest.raises(ValueError):
        max_feasible_step(P, [0.5, 0.5], [1.0, 1.0])    # leaves sum(x) = 1


def test_ratio_test_boundary_property(rng):
    for trial in range(60):
        n = int(rng.integers(2, 6))
        P, interior = random_bounded_polytope(rng, n)
        V = enumerate_vertices(P)
        w = rng.dirichlet(np.ones(len(V)))
        x = V.vertices.T @ w
        u = V.vertices.T @ rng.dirichlet(np.ones(len(V)))
        d = u - x
        if np.linalg.norm(d) < 1e-9:
            continue
        lam = max_feasible_step(P, x, d)
        assert math.isfinite(lam) or np.allclose(P.A @ d, 0, atol=1e-12)
        if math.isfinite(lam):
            assert feasibility_violation(P, x + lam * d) <= 1e-9
            assert feasibility_violation(P, x + (lam + 1e-6) * d) > 0.0


def test_enumerate_vertices_box():
    box = Polytope(A=np.vstack([np.eye(2), -np.eye(2)]),
                   b=[1.0, 1.0, 0.0, 0.0], C=np.zeros((0, 2)), d=[])
    V = enumerate_vertices(box)
    got = sorted(tuple(np.round(v, 12)) for v in V)
    assert got == [(0, 0), (0, 1), (1, 0), (1, 1)]


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_enumerate_vertices_simplex_count(n):
    assert len(enumerate_vertices(unit_simplex(n))) == n


def test_enumerate_vertices_guard():
    n = 40
    box = Polytope(A=np.vstack([np.eye(n), -np.eye(n)]),
                   b=np.concatenate([np.ones(n), np.zeros(n)]),
                   C=np.zeros((0, n)), d=[])
    with pytest.raises(ValueError):
        enumerate_vertices(box)


def test_project_simplex_threshold_examples():
    assert project_simplex([0.6, 0.6]) == pytest.approx([0.5, 0.5])
    assert project_simplex([1.2, -0.2]) == pytest.approx([1.0, 0.0])
    y = np.array([0.2, 0.3, 0.5])
    assert project_simplex(y) == pytest.approx(y)


def test_project_simplex_optimality(rng):
    for _ in range(20):
        n = int(rng.integers(2, 8))
        y = rng.normal(scale=2.0, size=n)
        u = project_simplex(y)
        assert abs(u.sum() - 1.0) <= 1e-12
        assert np.all(u >= 0.0)
        best = np.linalg.norm(u - y)
        w = rng.dirichlet(np.ones(n), size=1000)
        assert np.all(best <= np.linalg.norm(w - y, axis=1) + 1e-12)


def test_check_nonempty():
    assert check_nonempty(unit_simplex(3))
    empty = Polytope(A=[[1.0], [-1.0]], b=[-1.0, 0.0], C=np.zeros((0, 1)), d=[])
    assert not check_nonempty(empty)


def test_polytope_shape_validation():
    with pytest.raises(ValueError):
        Polytope(A=[[1.0, 0.0]], b=[0.0, 1.0], C=np.zeros((0, 2)), d=[])


def test_polytope_file_roundtrip(tmp_path):
    P = unit_simplex(3)
    path = tmp_path / "simplex.poly"
    write_polytope(P, path)
    Q = read_polytope(path)
    assert np.array_equal(P.A, Q.A) and np.array_equal(P.b, Q.b)
    assert np.array_equal(P.C, Q.C) and np.array_equal(P.d, Q.d)


def test_polytope_file_comments_and_whitespace():
    text = """
    # a 1-d box written across lines
    1 2 0
    1   1  # x <= 1
    -1
    0
    """
    P = read_polytope(io.StringIO(text))
    assert P.n == 1 and P.m1 == 2 and P.m2 == 0
    assert feasibility_violation(P, [0.5]) == 0.0
    assert feasibility_violation(P, [1.5]) == pytest.approx(0.5)


def test_polytope_file_token_count_error():
    with pytest.raises(ValueError):
        read_polytope(io.StringIO("2 1 0\n1.0 0.0"))
