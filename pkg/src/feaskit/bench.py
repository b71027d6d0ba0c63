"""Benchmark runner, timing statistics and Dolan-More performance profiles."""

from __future__ import annotations

import csv
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .errors import EmptyResults, FeaskitError
from .problem import GenParams, generate_ellipsoid_instance, sample_infeasible_start
from .schedules import PowerLaw
from .solvers import Algorithm, SolverConfig, run

RESULTS_HEADER = ["problem_id", "n", "m", "solver", "status", "iterations", "wall_time_s"]
SOLVED = ("FeasibleExact", "FeasibleWithinTol")
ERROR_STATUS = "Error"


def default_solvers(max_iter: int = 100_000) -> list[tuple[str, SolverConfig]]:
    """The seven benchmark configurations: eps = 1/k for the '1' variants, 1/sqrt(k) for '2'."""
    harmonic, sqrt = PowerLaw(1.0, 1.0), PowerLaw(1.0, 0.5)
    out = []
    for algo, label in [(Algorithm.PACA, "PACA"), (Algorithm.SSPM, "SSPM"), (Algorithm.MCSP, "MCSP")]:
        out.append((f"{label}1", SolverConfig(algo, harmonic, max_iter=max_iter, trace_every=0)))
        out.append((f"{label}2", SolverConfig(algo, sqrt, max_iter=max_iter, trace_every=0)))
    out.append(("CARMprod", SolverConfig(Algorithm.CARMPROD, max_iter=max_iter, trace_every=0)))
    return out


@dataclass
class SuiteConfig:
    """A grid of random ellipsoid problems crossed with a list of solvers.

    `start_radius` is the initial distance of the start point from the
    Slater point (it doubles until the point is infeasible). `workers`
    defaults to ``FEASKIT_THREADS`` or 1; ``sequential=True`` overrides it.
    """

    dims: list[int]
    counts: list[int]
    instances_per_cell: int = 10
    repetitions: int = 3
    solvers: list[tuple[str, SolverConfig]] = field(default_factory=default_solvers)
    seed: int = 0
    out_dir: str | os.PathLike | None = None
    gen_params: GenParams = field(default_factory=GenParams)
    start_radius: float = 10.0
    workers: int | None = None
    sequential: bool = False

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not self.solvers:
            raise ValueError("at least one solver is required")
        names = [name for name, _ in self.solvers]
        if len(set(names)) != len(names):
            raise ValueError("solver names must be unique")
        if self.instances_per_cell < 1 or not self.dims or not self.counts:
            raise ValueError("the problem grid is empty")


@dataclass
class RunResult:
    problem_id: str
    n: int
    m: int
    solver: str
    status: str
    iterations: int
    wall_time_s: float

    @property
    def solved(self) -> bool:
        return self.status in SOLVED


@dataclass
class ProfileCurve:
    """Right-continuous staircase ``rho(tau)`` sampled at every distinct finite ratio."""

    solver: str
    points: list[tuple[float, float]]

    def rho(self, tau: float) -> float:
        value = 0.0
        for t, r in self.points:
            if t <= tau:
                value = r
            else:
                break
        return value


@dataclass
class StatsRow:
    solver: str
    runs: int
    failed: int
    mean: float
    median: float
    min: float
    max: float


def problem_seeds(master: int, n: int, m: int, index: int) -> tuple[int, int]:
    """Independent (instance, start) seeds for one grid cell entry."""
    a, b = np.random.SeedSequence([master, n, m, index]).generate_state(2, np.uint32)
    return int(a), int(b)


def _timed_cell(n, m, index, inst_seed, start_seed, gen_params, start_radius, name, cfg, reps):
    inst = generate_ellipsoid_instance(n, m, inst_seed, gen_params)
    pid = f"{inst.id}-i{index}"
    try:
        x0 = sample_infeasible_start(inst, start_seed, radius=start_radius)
        times = []
        for _ in range(reps + 1):
            rep = run(cfg, inst, x0)
            times.append(rep.wall_time_s)
    except FeaskitError:
        return RunResult(pid, n, m, name, ERROR_STATUS, 0, math.nan)
    return RunResult(pid, n, m, name, rep.status.value, rep.iterations, statistics.median(times[1:]))


def _worker_count(cfg: SuiteConfig) -> int:
    if cfg.sequential:
        return 1
    cap = os.environ.get("FEASKIT_THREADS")
    cap = max(1, int(cap)) if cap else None
    wanted = cfg.workers if cfg.workers is not None else (cap or 1)
    return max(1, min(wanted, cap) if cap else wanted)


def run_suite(cfg: SuiteConfig) -> list[RunResult]:
    """Run every (problem, solver) cell; returns results ordered by problem then solver.

    Each cell is timed `repetitions + 1` times and the first run is discarded
    as warmup; the reported time is the median of the rest. Solver errors
    become ``status="Error"`` results.
    """
    tasks = []
    for n in cfg.dims:
        for m in cfg.counts:
            for index in range(cfg.instances_per_cell):
                inst_seed, start_seed = problem_seeds(cfg.seed, n, m, index)
                for name, scfg in cfg.solvers:
                    key = (n, m, index, name)
                    args = (n, m, index, inst_seed, start_seed, cfg.gen_params, cfg.start_radius,
                            name, scfg, cfg.repetitions)
                    tasks.append((key, args))

    workers = _worker_count(cfg)
    if workers == 1:
        results = [(key, _timed_cell(*args)) for key, args in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(key, pool.submit(_timed_cell, *args)) for key, args in tasks]
            results = [(key, fut.result()) for key, fut in futures]
    results.sort(key=lambda kr: kr[0])
    out = [r for _, r in results]

    if cfg.out_dir is not None:
        d = Path(cfg.out_dir)
        d.mkdir(parents=True, exist_ok=True)
        emit_csv(out, d / "results.csv")
    return out


def performance_profile(results: list[RunResult]) -> list[ProfileCurve]:
    """Dolan-More profiles on wall time.

    ``r_{p,s} = t_{p,s} / min_s' t_{p,s'}`` over solvers that solved p;
    unsolved runs get ``r = inf``. ``rho_s(tau)`` is the fraction of problems
    with ``r_{p,s} <= tau``.
    """
    if not results:
        raise EmptyResults("no results to profile")
    solvers = list(dict.fromkeys(r.solver for r in results))
    problems = list(dict.fromkeys(r.problem_id for r in results))
    times = {}
    for r in results:
        key = (r.problem_id, r.solver)
        if key in times:
            raise ValueError(f"duplicate result for problem {r.problem_id!r}, solver {r.solver!r}")
        times[key] = r.wall_time_s if r.solved else math.inf

    ratios = {s: [] for s in solvers}
    for p in problems:
        best = min(times.get((p, s), math.inf) for s in solvers)
        for s in solvers:
            t = times.get((p, s), math.inf)
            ratios[s].append(t / best if math.isfinite(t) else math.inf)

    taus = sorted({r for rs in ratios.values() for r in rs if math.isfinite(r)})
    n_prob = len(problems)
    curves = []
    for s in solvers:
        rs = np.sort(np.array(ratios[s]))
        counts = np.searchsorted(rs, taus, side="right")
        curves.append(ProfileCurve(s, [(float(t), float(c) / n_prob) for t, c in zip(taus, counts)]))
    return curves


def summarize_stats(results: list[RunResult]) -> list[StatsRow]:
    """Mean/median/min/max wall time per solver over solved runs."""
    if not results:
        raise EmptyResults("no results to summarize")
    rows = []
    for s in dict.fromkeys(r.solver for r in results):
        mine = [r for r in results if r.solver == s]
        t = [float(r.wall_time_s) for r in mine if r.solved]
        failed = len(mine) - len(t)
        if t:
            rows.append(StatsRow(s, len(mine), failed, statistics.fmean(t), statistics.median(t), min(t), max(t)))
        else:
            rows.append(StatsRow(s, len(mine), failed, math.nan, math.nan, math.nan, math.nan))
    return rows


def format_stats(rows: list[StatsRow]) -> str:
    lines = [f"{'solver':<10} {'runs':>5} {'failed':>6} {'mean':>11} {'median':>11} {'min':>11} {'max':>11}"]
    for r in rows:
        lines.append(
            f"{r.solver:<10} {r.runs:>5} {r.failed:>6} {r.mean:>11.4e} {r.median:>11.4e} {r.min:>11.4e} {r.max:>11.4e}"
        )
    return "\n".join(lines)


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def emit_csv(items, path):
    """Write results, profile curves or stats rows to CSV, picked by element type."""
    items = list(items)
    if not items:
        raise EmptyResults("nothing to write")
    first = items[0]
    if isinstance(first, RunResult):
        header = RESULTS_HEADER
        rows = [[r.problem_id, r.n, r.m, r.solver, r.status, r.iterations, _fmt(r.wall_time_s)] for r in items]
    elif isinstance(first, ProfileCurve):
        header = ["solver", "tau", "rho"]
        rows = [[c.solver, _fmt(t), _fmt(r)] for c in items for t, r in c.points]
    elif isinstance(first, StatsRow):
        header = ["solver", "runs", "failed", "mean", "median", "min", "max"]
        rows = [[r.solver, r.runs, r.failed, _fmt(r.mean), _fmt(r.median), _fmt(r.min), _fmt(r.max)] for r in items]
    else:
        raise TypeError(f"cannot write {type(first).__name__} items")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_results_csv(path) -> list[RunResult]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULTS_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        return [
            RunResult(row["problem_id"], int(row["n"]), int(row["m"]), row["solver"], row["status"],
                      int(row["iterations"]), float(row["wall_time_s"]))
            for row in reader
        ]


SVG_W, SVG_H = 640, 400
PLOT = (60, 20, 470, 330)  # left, top, width, height
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]


def profile_xmax(curves) -> float:
    """Right end of the log2(tau) axis."""
    last = max((c.points[-1][0] for c in curves if c.points), default=1.0)
    return max(1.0, math.log2(last))


def _staircase(curve, xmax):
    left, top, width, height = PLOT

    def px(lt, rho):
        return f"{left + lt / xmax * width:.3f},{top + (1.0 - rho) * height:.3f}"

    pts = []
    prev = 0.0
    for tau, rho in curve.points:
        lt = math.log2(tau)
        pts.append(px(lt, prev))
        pts.append(px(lt, rho))
        prev = rho
    pts.append(px(xmax, prev))
    return " ".join(pts)


def emit_profile_svg(curves, path):
    """Render profile curves as an SVG staircase plot with a log2(tau) axis."""
    curves = list(curves)
    if not curves:
        raise EmptyResults("no curves to plot")
    left, top, width, height = PLOT
    xmax = profile_xmax(curves)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
        f'data-xmax="{xmax!r}" font-family="sans-serif" font-size="12">',
        f'<rect x="{left}" y="{top}" width="{width}" height="{height}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        rho = i / 4
        y = top + (1 - rho) * height
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{rho:.2f}</text>')
    ticks = max(1, math.ceil(xmax))
    for i in range(ticks + 1):
        lt = min(i, xmax)
        x = left + lt / xmax * width
        out.append(f'<text x="{x:.1f}" y="{top + height + 16}" text-anchor="middle">{lt:g}</text>')
    out.append(f'<text x="{left + width / 2}" y="{SVG_H - 30}" text-anchor="middle">log2(tau)</text>')
    out.append(f'<text x="14" y="{top + height / 2}" transform="rotate(-90 14 {top + height / 2})" '
               f'text-anchor="middle">rho(tau)</text>')
    for i, c in enumerate(curves):
        color = COLORS[i % len(COLORS)]
        out.append(f'<polyline data-solver={quoteattr(c.solver)} fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{_staircase(c, xmax)}"/>')
        ly = top + 14 + 16 * i
        lx = left + width + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}">{escape(c.solver)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
