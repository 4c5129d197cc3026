"""Experiment runner, performance profiles, and file emission.

A plan is a grid of (p, n, m) triples and seeds; every selected solver runs
on every instance from the same start vertex.  Results aggregate into a
Table-1 style summary plus Dolan-More performance profiles, rendered as
self-contained SVG (no plotting dependency).
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import enumerate_vertices, unit_simplex
from .problems import make_quadratic
from .solvers import SolverConfig, run_afw, run_dipfw, run_fw, run_pg, \
    write_trace_csv

SOLVER_IDS = ("fw", "afw", "dipfw", "pg")


@dataclass
class ExperimentPlan:
    """What to run: dimension triples, seeds per triple, solvers, and the
    solver settings shared by every run."""

    dims: list                      # [(p, n, m), ...]
    seeds: list                     # [int, ...]
    solvers: list                   # subset of SOLVER_IDS
    eps: float = 1e-4
    max_iter: int = 20000
    step_mode: str = "adaptive"
    stop_mode: str = "pairwise_gap"
    eta: float = 0.9
    tau: float = 2.0
    out_dir: str = "bench_out"

    def __post_init__(self):
        if not self.dims or not self.seeds or not self.solvers:
            raise ValueError("plan needs at least one dim, seed and solver")
        for s in self.solvers:
            if s not in SOLVER_IDS:
                raise ValueError(f"unknown solver {s!r}")
        self.dims = [tuple(int(v) for v in t) for t in self.dims]
        self.seeds = [int(s) for s in self.seeds]

    def config(self) -> SolverConfig:
        return SolverConfig(eps=self.eps, max_iter=self.max_iter,
                            step_mode=self.step_mode, stop_mode=self.stop_mode,
                            eta=self.eta, tau=self.tau)


@dataclass
class RunResult:
    iterations: int
    time_s: float
    final_gap: float | None
    status: str                     # solver status, or 'error'
    message: str = ""


@dataclass
class ResultMatrix:
    """Rectangular (instance x solver) grid of run outcomes.

    Failed runs stay in the grid with their status; nothing is dropped."""

    instances: list                 # [((p, n, m), seed), ...]
    solvers: list
    cells: dict                     # (instance index, solver) -> RunResult
    traces: dict = field(default_factory=dict)

    def result(self, idx, solver) -> RunResult:
        return self.cells[(idx, solver)]


@dataclass
class PerformanceProfile:
    """Dolan-More ratio curves rho_s(tau) for one metric.

    ratios[s][i] is metric(instance i, s) / best metric over solvers; failed
    runs carry ratio +inf.  rho_at evaluates the cumulative curve exactly,
    the tau grid is only a rendering aid.
    """

    metric: str                     # 'time' | 'iterations'
    solvers: list
    ratios: dict                    # solver -> np.ndarray over problems
    tau_grid: np.ndarray
    rho: dict                       # solver -> np.ndarray over tau_grid

    def rho_at(self, solver, tau) -> float:
        r = self.ratios[solver]
        return float(np.count_nonzero(r <= tau) / r.size)


def _start_vertex(n):
    # Every solver, AFW included, starts from the same feasible point; a
    # vertex is the one start that AFW accepts without decomposition data.
    x0 = np.zeros(n)
    x0[0] = 1.0
    return x0


def run_experiment(plan: ExperimentPlan, keep_traces: bool = True) -> ResultMatrix:
    """Run every selected solver on every (triple, seed) instance.

    Solver errors are caught and recorded as failed cells; the experiment
    always completes the grid.  Iteration-level results are deterministic
    per seed, wall times are not.
    """
    instances = [(dim, seed) for dim in plan.dims for seed in plan.seeds]
    cells = {}
    traces = {}
    cfg = plan.config()
    for idx, ((p, n, m), seed) in enumerate(instances):
        prob = make_quadratic(p, n, m, seed).as_problem()
        P = unit_simplex(n)
        V = enumerate_vertices(P) if "afw" in plan.solvers else None
        x0 = _start_vertex(n)
        for solver in plan.solvers:
            t0 = time.perf_counter()
            try:
                if solver == "dipfw":
                    tr = run_dipfw(prob, P, x0.copy(), cfg)
                elif solver == "fw":
                    tr = run_fw(prob, P, x0.copy(), cfg)
                elif solver == "afw":
                    tr = run_afw(prob, V, x0=x0.copy(), cfg=cfg)
                else:
                    tr = run_pg(prob, x0.copy(), cfg)
            except Exception as exc:   # recorded, the grid must complete
                cells[(idx, solver)] = RunResult(
                    iterations=0, time_s=time.perf_counter() - t0,
                    final_gap=None, status="error", message=str(exc))
                continue
            cells[(idx, solver)] = RunResult(
                iterations=tr.iterations, time_s=time.perf_counter() - t0,
                final_gap=tr.final_gap, status=tr.status, message=tr.message)
            if keep_traces:
                traces[(idx, solver)] = tr
    return ResultMatrix(instances=instances, solvers=list(plan.solvers),
                        cells=cells, traces=traces)


def performance_profile(results: ResultMatrix, metric: str) -> PerformanceProfile:
    """Ratio-to-best curves over the result matrix.

    metric is 'time' or 'iterations'.  A run that did not converge gets
    ratio +inf; a problem on which every solver failed is excluded with a
    warning.
    """
    if metric not in ("time", "iterations"):
        raise ValueError(f"unknown profile metric {metric!r}")
    if len(results.solvers) < 2:
        raise ValueError("a profile needs at least two solvers")

    rows = []
    for idx in range(len(results.instances)):
        vals = []
        for s in results.solvers:
            cell = results.result(idx, s)
            if cell.status == "converged":
                vals.append(cell.time_s if metric == "time" else cell.iterations)
            else:
                vals.append(math.inf)
        best = min(vals)
        if math.isinf(best):
            warnings.warn(
                f"instance {results.instances[idx]} failed on every solver; "
                f"excluded from the {metric} profile")
            continue
        rows.append([v / best for v in vals])
    if not rows:
        raise ValueError("no instance finished on any solver")
    mat = np.array(rows)                       # (problems, solvers)
    ratios = {s: mat[:, j] for j, s in enumerate(results.solvers)}

    finite = mat[np.isfinite(mat)]
    top = float(finite.max()) if finite.size else 1.0
    grid = np.unique(np.concatenate([
        [1.0], np.geomspace(1.0, max(top, 1.0 + 1e-12), 64)]))
    rho = {s: np.array([np.count_nonzero(ratios[s] <= t) / mat.shape[0]
                        for t in grid])
           for s in results.solvers}
    return PerformanceProfile(metric=metric, solvers=list(results.solvers),
                              ratios=ratios, tau_grid=grid, rho=rho)


def _dim_label(dim):
    p, n, m = dim
    return f"{p}x{n}x{m}"


def summary_rows(results: ResultMatrix):
    """Table-1 style aggregation: (method, dim, metric, min, mean, max) over
    the converged runs of each (dim, solver) block, plus a censoring list."""
    rows = []
    censored = []
    dims = []
    for dim, _ in results.instances:
        if dim not in dims:
            dims.append(dim)
    for dim in dims:
        idxs = [i for i, (d, _) in enumerate(results.instances) if d == dim]
        for metric in ("time", "iterations"):
            for s in results.solvers:
                cells = [results.result(i, s) for i in idxs]
                vals = [c.time_s if metric == "time" else c.iterations
                        for c in cells if c.status == "converged"]
                failed = sum(1 for c in cells if c.status != "converged")
                if failed:
                    censored.append((s, _dim_label(dim), failed, len(cells)))
                if not vals:
                    continue
                rows.append((s, _dim_label(dim), metric,
                             min(vals), float(np.mean(vals)), max(vals)))
    # censored entries are duplicated per metric; keep unique ones
    censored = sorted(set(censored))
    return rows, censored


SVG_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def profile_svg(profile: PerformanceProfile) -> str:
    """Render a profile as a self-contained 800x600 SVG step plot with a
    log-scaled tau axis, one polyline per solver, and a legend."""
    width, height = 800, 600
    ml, mr, mt, mb = 70, 30, 40, 60
    pw, ph = width - ml - mr, height - mt - mb
    taus = profile.tau_grid
    log_top = math.log10(max(float(taus[-1]), 1.0 + 1e-9))
    if log_top <= 0.0:
        log_top = 1e-9

    def xpix(tau):
        return ml + pw * min(math.log10(max(tau, 1.0)) / log_top, 1.0)

    def ypix(rho):
        return mt + ph * (1.0 - rho)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" '
        f'font-size="16">Performance profile ({profile.metric})</text>',
    ]
    # axes and ticks
    parts.append(f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" '
                 f'y2="{mt + ph}" stroke="black"/>')
    parts.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" '
                 f'stroke="black"/>')
    for i in range(11):
        rho = i / 10.0
        y = ypix(rho)
        parts.append(f'<line x1="{ml - 4}" y1="{y:.1f}" x2="{ml}" '
                     f'y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{y + 4:.1f}" text-anchor="end" '
                     f'font-size="11">{rho:.1f}</text>')
    for i in range(11):
        tau = 10.0 ** (log_top * i / 10.0)
        xpx = xpix(tau)
        parts.append(f'<line x1="{xpx:.1f}" y1="{mt + ph}" x2="{xpx:.1f}" '
                     f'y2="{mt + ph + 4}" stroke="black"/>')
        parts.append(f'<text x="{xpx:.1f}" y="{mt + ph + 18}" '
                     f'text-anchor="middle" font-size="11">{tau:.3g}</text>')
    parts.append(f'<text x="{ml + pw / 2:.0f}" y="{height - 16}" '
                 f'text-anchor="middle" font-size="13">ratio to best '
                 f'(log scale)</text>')

    for j, s in enumerate(profile.solvers):
        color = SVG_PALETTE[j % len(SVG_PALETTE)]
        pts = []
        prev_rho = profile.rho[s][0]
        pts.append(f"{xpix(taus[0]):.1f},{ypix(prev_rho):.1f}")
        for t, r in zip(taus[1:], profile.rho[s][1:]):
            pts.append(f"{xpix(t):.1f},{ypix(prev_rho):.1f}")   # step across
            pts.append(f"{xpix(t):.1f},{ypix(r):.1f}")          # step up
            prev_rho = r
        parts.append(f'<polyline fill="none" stroke="{color}" '
                     f'stroke-width="2" points="{" ".join(pts)}"/>')
        ly = mt + 16 + 18 * j
        parts.append(f'<line x1="{ml + 12}" y1="{ly}" x2="{ml + 44}" '
                     f'y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{ml + 50}" y="{ly + 4}" '
                     f'font-size="12">{s}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def emit_outputs(results: ResultMatrix, profiles, out_dir,
                 plan: ExperimentPlan | None = None):
    """Write summary.csv, results.csv, per-run trace CSVs, profile SVGs and
    a manifest into ``out_dir``.  Returns the list of paths written."""
    if not results.instances:
        raise ValueError("empty result matrix; nothing to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    rows, censored = summary_rows(results)
    path = out / "summary.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("method,dim,metric,min,mean,max\n")
        for s, dim, metric, lo, mean, hi in rows:
            if metric == "iterations":
                fh.write(f"{s},{dim},{metric},{lo},{mean!r},{hi}\n")
            else:
                fh.write(f"{s},{dim},{metric},{lo:.6g},{mean:.6g},{hi:.6g}\n")
        for s, dim, failed, total in censored:
            fh.write(f"# censored: {s} {dim} {failed}/{total} runs did not "
                     f"converge\n")
    written.append(path)

    path = out / "results.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("p,n,m,seed,solver,status,iterations,time_s,final_gap\n")
        for idx, ((p, n, m), seed) in enumerate(results.instances):
            for s in results.solvers:
                c = results.result(idx, s)
                gap = "" if c.final_gap is None else f"{c.final_gap:.17g}"
                fh.write(f"{p},{n},{m},{seed},{s},{c.status},{c.iterations},"
                         f"{c.time_s:.6g},{gap}\n")
    written.append(path)

    for (idx, s), tr in results.traces.items():
        (p, n, m), seed = results.instances[idx]
        path = out / f"trace_{s}_{p}x{n}x{m}_s{seed}.csv"
        write_trace_csv(tr, path)
        written.append(path)

    for prof in profiles:
        path = out / f"profile_{prof.metric}.svg"
        path.write_text(profile_svg(prof), encoding="utf-8")
        written.append(path)

    path = out / "manifest.txt"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"generated: {time.strftime('%Y-%m-%dT%H:%M:%S%z')}\n")
        fh.write(f"version: mofw {__version__}\n")
        if plan is not None:
            fh.write(f"dims: {'; '.join(_dim_label(d) for d in plan.dims)}\n")
            fh.write(f"seeds: {', '.join(str(s) for s in plan.seeds)}\n")
            fh.write(f"solvers: {', '.join(plan.solvers)}\n")
            fh.write(f"eps: {plan.eps}\nmax_iter: {plan.max_iter}\n")
            fh.write(f"step_mode: {plan.step_mode}\nstop_mode: {plan.stop_mode}\n")
            fh.write(f"eta: {plan.eta}\ntau: {plan.tau}\n")
    written.append(path)
    return written


def parse_plan(source) -> ExperimentPlan:
    """Parse the ``key = value`` plan format.

    Keys: dims (semicolon-separated p,n,m triples), seeds (comma list or
    a..b range), solvers (comma list), eps, max_iter, step_mode, stop_mode,
    eta, tau, out_dir.  '#' starts a comment.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        raw[key] = val

    known = {"dims", "seeds", "solvers", "eps", "max_iter", "step_mode",
             "stop_mode", "eta", "tau", "out_dir"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown plan keys: {', '.join(sorted(unknown))}")
    if "dims" not in raw or "seeds" not in raw or "solvers" not in raw:
        raise ValueError("plan needs dims, seeds and solvers")

    dims = []
    for chunk in raw["dims"].split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [v.strip() for v in chunk.split(",")]
        if len(parts) != 3:
            raise ValueError(f"dim triple {chunk!r} is not p,n,m")
        dims.append(tuple(int(v) for v in parts))

    seeds = []
    for chunk in raw["seeds"].split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ".." in chunk:
            lo, hi = chunk.split("..", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(chunk))

    solvers = [s.strip() for s in raw["solvers"].split(",") if s.strip()]
    kwargs = {}
    if "eps" in raw:
        kwargs["eps"] = float(raw["eps"])
    if "max_iter" in raw:
        kwargs["max_iter"] = int(raw["max_iter"])
    if "step_mode" in raw:
        kwargs["step_mode"] = raw["step_mode"]
    if "stop_mode" in raw:
        kwargs["stop_mode"] = raw["stop_mode"]
    if "eta" in raw:
        kwargs["eta"] = float(raw["eta"])
    if "tau" in raw:
        kwargs["tau"] = float(raw["tau"])
    if "out_dir" in raw:
        kwargs["out_dir"] = raw["out_dir"]
    return ExperimentPlan(dims=dims, seeds=seeds, solvers=solvers, **kwargs)


def load_results_csv(source) -> ResultMatrix:
    """Rebuild a ResultMatrix (without traces) from results.csv."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    if not lines or lines[0].split(",")[0] != "p":
        raise ValueError("not a results.csv file")
    instances = []
    solvers = []
    cells = {}
    for line in lines[1:]:
        if not line.strip() or line.startswith("#"):
            continue
        p, n, m, seed, solver, status, iters, time_s, gap = line.split(",")
        key = ((int(p), int(n), int(m)), int(seed))
        if key not in instances:
            instances.append(key)
        if solver not in solvers:
            solvers.append(solver)
        cells[(instances.index(key), solver)] = RunResult(
            iterations=int(iters), time_s=float(time_s),
            final_gap=float(gap) if gap else None, status=status)
    return ResultMatrix(instances=instances, solvers=solvers, cells=cells)
