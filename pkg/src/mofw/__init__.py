"""Multiobjective Frank-Wolfe solvers over bounded polytopes."""

from .geometry import (Polytope, TightSet, VertexSet, enumerate_vertices,
                       feasibility_violation, max_feasible_step,
                       project_simplex, read_polytope, tight_set,
                       unit_simplex, write_polytope)
from .lp import LpProblem, LpSolution, solve_lp
from .problems import (MultiobjectiveProblem, QuadraticInstance, gap_sigma,
                       load_instance, make_quadratic, save_instance)
from .directions import (DirectionResult, afw_direction, fw_direction,
                         pairwise_direction, pg_direction)
from .stepsize import (StepResult, StepSizeState, adaptive_step, armijo_step,
                       exact_line_search)
from .solvers import (IterateRecord, SolverConfig, SolverTrace, classify_step,
                      run_afw, run_dipfw, run_fw, run_pg, write_trace_csv)

__version__ = "0.1.0"

__all__ = [
    "Polytope", "TightSet", "VertexSet", "enumerate_vertices",
    "feasibility_violation", "max_feasible_step", "project_simplex",
    "read_polytope", "tight_set", "unit_simplex", "write_polytope",
    "LpProblem", "LpSolution", "solve_lp",
    "MultiobjectiveProblem", "QuadraticInstance", "gap_sigma",
    "load_instance", "make_quadratic", "save_instance",
    "DirectionResult", "afw_direction", "fw_direction",
    "pairwise_direction", "pg_direction",
    "StepResult", "StepSizeState", "adaptive_step", "armijo_step",
    "exact_line_search",
    "IterateRecord", "SolverConfig", "SolverTrace", "classify_step",
    "run_afw", "run_dipfw", "run_fw", "run_pg", "write_trace_csv",
    "__version__",
]
