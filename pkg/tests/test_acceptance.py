"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
The seeded solver suites are shared across criteria through module-scoped
fixtures, so the whole file stays well inside its time budgets.
"""

import contextlib
import time

import numpy as np
import pytest

from mofw import (SolverConfig, StepSizeState, adaptive_step, fw_direction,
                  make_quadratic, pairwise_direction, run_dipfw, run_fw,
                  run_pg, solve_lp, unit_simplex)
from mofw.bench import performance_profile
from mofw.geometry import enumerate_vertices, feasibility_violation
from mofw.lp import LpProblem

from conftest import linear_problem, random_bounded_polytope, target_problem
from test_bench import matrix_from_times
from test_problems import central_difference_jacobian

SEEDS = tuple(range(1, 11))


@contextlib.contextmanager
def criterion(num, text):
    try:
        yield
    except BaseException:
        print(f"criterion {num:2d} FAIL: {text}")
        raise
    print(f"criterion {num:2d} PASS: {text}")


def start_vertex(n):
    x0 = np.zeros(n)
    x0[0] = 1.0
    return x0


@pytest.fixture(scope="module")
def suite10():
    """10 seeded (10,10,2) instances, eps 1e-4, adaptive steps, shared x0."""
    P = unit_simplex(10)
    cfg = SolverConfig(eps=1e-4)
    runs = {"dipfw": [], "pg": [], "fw": []}
    times = {"dipfw": [], "pg": [], "fw": []}
    problems = []
    t00 = time.perf_counter()
    for seed in SEEDS:
        prob = make_quadratic(10, 10, 2, seed=seed).as_problem()
        problems.append(prob)
        for name, call in (
                ("dipfw", lambda: run_dipfw(prob, P, start_vertex(10), cfg)),
                ("pg", lambda: run_pg(prob, start_vertex(10), cfg)),
                ("fw", lambda: run_fw(prob, P, start_vertex(10), cfg))):
            t0 = time.perf_counter()
            tr = call()
            times[name].append(time.perf_counter() - t0)
            runs[name].append(tr)
    return {"runs": runs, "times": times, "problems": problems,
            "elapsed": time.perf_counter() - t00, "P": P}


@pytest.fixture(scope="module")
def fwgap5():
    """5 seeded DIPFW runs that solve the toward-point LP every iteration."""
    P = unit_simplex(10)
    cfg = SolverConfig(eps=1e-4, stop_mode="fw_gap")
    out = []
    t0 = time.perf_counter()
    for seed in SEEDS[:5]:
        prob = make_quadratic(10, 10, 2, seed=seed).as_problem()
        out.append((prob, run_dipfw(prob, P, start_vertex(10), cfg)))
    return {"runs": out, "elapsed": time.perf_counter() - t0, "P": P}


@pytest.fixture(scope="module")
def rate5():
    """5 full-column-rank (20,10,2) instances driven to eps = 1e-8."""
    P = unit_simplex(10)
    cfg = SolverConfig(eps=1e-8, max_iter=5000)
    out = []
    t0 = time.perf_counter()
    for seed in SEEDS[:5]:
        inst = make_quadratic(20, 10, 2, seed=seed)
        prob = inst.as_problem()
        assert prob.strong_convexity_mu is not None
        out.append((prob, run_dipfw(prob, P, start_vertex(10), cfg)))
    return {"runs": out, "elapsed": time.perf_counter() - t0, "P": P}


def all_dipfw_traces(suite10, fwgap5, rate5):
    traces = list(suite10["runs"]["dipfw"])
    traces += [tr for _, tr in fwgap5["runs"]]
    traces += [tr for _, tr in rate5["runs"]]
    return traces


def all_solver_runs(suite10, fwgap5, rate5):
    pairs = []
    for name in ("dipfw", "pg", "fw"):
        pairs += list(zip(suite10["problems"], suite10["runs"][name]))
    pairs += fwgap5["runs"]
    pairs += rate5["runs"]
    return pairs


def test_criterion_1_iteration_bands(suite10):
    with criterion(1, "iteration-count bands on the 10-instance suite"):
        for name in ("dipfw", "pg", "fw"):
            assert all(tr.status == "converged"
                       for tr in suite10["runs"][name])
        dip = np.mean([tr.iterations for tr in suite10["runs"]["dipfw"]])
        pg = np.mean([tr.iterations for tr in suite10["runs"]["pg"]])
        fw = np.mean([tr.iterations for tr in suite10["runs"]["fw"]])
        assert 10.0 <= dip <= 150.0, f"dipfw mean {dip}"
        assert 10.0 <= pg <= 150.0, f"pg mean {pg}"
        assert fw >= 10.0 * dip, f"fw mean {fw} vs dipfw mean {dip}"
        assert suite10["elapsed"] < 120.0


def test_criterion_2_dipfw_faster_than_pg(suite10):
    with criterion(2, "dipfw mean wall time <= pg mean wall time"):
        t_dip = np.mean(suite10["times"]["dipfw"])
        t_pg = np.mean(suite10["times"]["pg"])
        assert t_dip <= t_pg, f"dipfw {t_dip:.4f}s vs pg {t_pg:.4f}s"


def test_criterion_3_gap_ordering(fwgap5):
    with criterion(3, "pairwise gap <= toward gap <= 0 along fw_gap runs"):
        assert fwgap5["elapsed"] < 10.0
        for _, tr in fwgap5["runs"]:
            assert tr.status == "converged"
            assert tr.records, "no iterations recorded"
            for r in tr.records:
                assert r.theta_pw <= r.theta_fw + 1e-9 <= 1e-9


def test_criterion_4_linear_rate(rate5):
    with criterion(4, "geometric decay of the gap over good steps"):
        assert rate5["elapsed"] < 30.0
        for prob, tr in rate5["runs"]:
            assert tr.status == "converged"
            sig = np.array([prob.sigma(r.x, tr.final_x)
                            for r in tr.records if r.step_class == "good"])
            sig = sig[sig > 1e-14]
            assert sig.size >= 10
            slope = np.polyfit(np.arange(sig.size), np.log(sig), 1)[0]
            assert np.exp(slope) <= 0.95, f"decay factor {np.exp(slope)}"


def test_criterion_5_bad_step_runs(suite10, fwgap5, rate5):
    with criterion(5, "every run of consecutive bad steps is shorter than n"):
        n = 10
        for tr in all_dipfw_traces(suite10, fwgap5, rate5):
            streak = 0
            for r in tr.records:
                streak = streak + 1 if r.step_class == "bad" else 0
                assert streak < n


def test_criterion_6_feasibility_and_monotonicity(suite10, fwgap5, rate5):
    with criterion(6, "iterates feasible and objectives non-increasing"):
        P = suite10["P"]
        for prob, tr in all_solver_runs(suite10, fwgap5, rate5):
            for r in tr.records:
                assert feasibility_violation(P, r.x) <= 1e-9
            assert feasibility_violation(P, tr.final_x) <= 1e-9
            objs = np.array([r.objectives for r in tr.records]
                            + [tr.final_objectives])
            if len(objs) > 1:
                assert float(np.max(objs[1:] - objs[:-1])) <= 1e-10


def test_criterion_7_lp_oracle_equivalence(rng):
    with criterion(7, "simplex optimum matches vertex enumeration on "
                      "100 random LPs"):
        t0 = time.perf_counter()
        for trial in range(100):
            n = int(rng.integers(2, 6))
            P, _ = random_bounded_polytope(rng, n)
            c = rng.normal(size=n)
            oracle = min(float(c @ v) for v in enumerate_vertices(P))
            sol = solve_lp(LpProblem(objective=c, ineq_lhs=P.A, ineq_rhs=P.b,
                                     eq_lhs=P.C, eq_rhs=P.d,
                                     free_vars=frozenset(range(n))))
            assert sol.status == "optimal"
            assert abs(sol.value - oracle) <= 1e-8
        assert time.perf_counter() - t0 < 5.0


def test_criterion_8_subproblem_spot_values():
    with criterion(8, "toward/pairwise subproblems reproduce worked values"):
        P2 = unit_simplex(2)
        x = np.array([0.5, 0.5])
        res = fw_direction(linear_problem([[1, 0], [0, 1]]), P2, x)
        assert abs(res.theta) <= 1e-8
        res = fw_direction(linear_problem([[1, 2]]), P2, x)
        assert abs(res.theta + 0.5) <= 1e-8
        assert np.allclose(res.toward, [1, 0], atol=1e-8)
        res = fw_direction(linear_problem([[1, 2], [1, 3]]), P2, x)
        assert abs(res.theta + 0.5) <= 1e-8

        res = pairwise_direction(linear_problem([[1, 2]]), P2, x)
        assert abs(res.theta + 1.0) <= 1e-8
        assert np.allclose(res.toward, [1, 0], atol=1e-8)
        assert np.allclose(res.away, [0, 1], atol=1e-8)
        res = pairwise_direction(linear_problem([[1, 2]]), P2,
                                 np.array([1.0, 0.0]))
        assert abs(res.theta) <= 1e-8

        crafted = target_problem([[0.45, 0.55], [0.55, 0.45]])
        assert abs(fw_direction(crafted, P2, [0.5, 0.5]).theta) <= 1e-9
        assert fw_direction(crafted, P2, [0.6, 0.4]).theta < -1e-3


def test_criterion_9_step_size_contract(suite10, fwgap5, rate5):
    with criterion(9, "adaptive exit inequality holds at every step"):
        res = adaptive_step(target_problem([[0.0, 0.0]]), [1.0, 0.0],
                            [-1.0, 0.0], gap=-1.0, lambda_max=1.0,
                            state=StepSizeState(L_est=1.0))
        assert abs(res.lam - 1.0 / 1.8) <= 1e-9
        assert abs(res.L_out - 1.8) <= 1e-9
        assert res.backtracks == 1

        for prob, tr in all_solver_runs(suite10, fwgap5, rate5):
            if tr.solver_id == "pg":
                continue                      # Armijo rule, not Algorithm-2
            for r in tr.records:
                assert r.L_out is not None
                f0 = prob.evaluate(r.x)
                lhs = float(np.max(prob.evaluate(r.x + r.lam * r.direction)
                                   - f0))
                gap = float(np.max(prob.jacobian(r.x) @ r.direction))
                rhs = (r.lam * gap + 0.5 * r.lam ** 2 * r.L_out
                       * float(r.direction @ r.direction))
                slack = 2e-12 * max(1.0, float(np.max(np.abs(f0))))
                assert lhs <= rhs + slack


def test_criterion_10_one_step_exactness():
    with criterion(10, "t-target quadratic converges in one exact-step "
                       "iteration"):
        prob = target_problem([[0.2, 0.8]])
        tr = run_dipfw(prob, unit_simplex(2), x0=start_vertex(2),
                       cfg=SolverConfig(step_mode="exact_line_search"))
        assert tr.status == "converged"
        assert tr.iterations == 1
        assert np.max(np.abs(tr.final_x - [0.2, 0.8])) <= 1e-10


def test_criterion_11_derivative_check(rng):
    with criterion(11, "jacobians match central differences on 5 instances"):
        for seed in SEEDS[:5]:
            prob = make_quadratic(12, 8, 2, seed=seed).as_problem()
            for _ in range(100):
                x = rng.uniform(size=8)
                J = prob.jacobian(x)
                J_fd = central_difference_jacobian(prob, x)
                denom = max(1.0, float(np.linalg.norm(J)))
                assert np.linalg.norm(J - J_fd) / denom <= 1e-6


def test_criterion_12_profile_correctness():
    with criterion(12, "two-solver profile example and monotone curves"):
        results = matrix_from_times([[1.0, 2.0], [4.0, 2.0]])
        prof = performance_profile(results, "time")
        assert prof.rho_at("s1", 1.0) == pytest.approx(0.5)
        assert prof.rho_at("s2", 1.0) == pytest.approx(0.5)
        assert prof.rho_at("s1", 2.0) == pytest.approx(1.0)
        assert prof.rho_at("s2", 2.0) == pytest.approx(1.0)
        for s in prof.solvers:
            assert np.all(np.diff(prof.rho[s]) >= 0.0)
