"""Command-line entry point: ``feaskit generate|solve|bench|profile``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench
from .errors import FeaskitError
from .problem import GenParams, generate_ellipsoid_instance, read_instance, sample_infeasible_start, write_instance
from .schedules import PowerLaw, parse_schedule
from .solvers import Algorithm, SolverConfig, run


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None


def _add_gen_params(p):
    d = GenParams()
    p.add_argument("--eig-lo", type=float, default=d.eig_lo)
    p.add_argument("--eig-hi", type=float, default=d.eig_hi)
    p.add_argument("--b-scale", type=float, default=None, help="default 1/sqrt(n)")
    p.add_argument("--c-lo", type=float, default=d.c_lo)
    p.add_argument("--c-hi", type=float, default=d.c_hi)


def _gen_params(args):
    return GenParams(args.eig_lo, args.eig_hi, args.b_scale, args.c_lo, args.c_hi)


def cmd_generate(args):
    inst = generate_ellipsoid_instance(args.n, args.m, args.seed, _gen_params(args))
    Path(args.out).write_bytes(write_instance(inst))
    print(f"wrote {inst.id} to {args.out}")


def cmd_solve(args):
    inst = read_instance(Path(args.instance).read_bytes())
    x0 = sample_infeasible_start(inst, args.x0_seed, radius=args.x0_radius)
    cfg = SolverConfig(
        algorithm=Algorithm(args.algorithm),
        schedule=parse_schedule(args.schedule),
        feasibility_tol=args.tol,
        max_iter=args.max_iter,
        trace_every=1 if args.trace else 0,
    )
    report = run(cfg, inst, x0)
    if args.trace:
        Path(args.trace).write_text(report.to_json(include_trace=True) + "\n")
    print(report.to_json())
    return 0 if report.status.solved else 2


def cmd_bench(args):
    cfg = bench.SuiteConfig(
        dims=args.dims,
        counts=args.counts,
        instances_per_cell=args.instances,
        repetitions=args.reps,
        seed=args.seed,
        out_dir=args.out,
        gen_params=_gen_params(args),
        start_radius=args.start_radius,
        workers=args.workers,
        sequential=args.sequential,
        solvers=bench.default_solvers(args.max_iter),
    )
    results = bench.run_suite(cfg)
    out = Path(args.out)
    stats = bench.summarize_stats(results)
    bench.emit_csv(stats, out / "stats.csv")
    curves = bench.performance_profile(results)
    bench.emit_csv(curves, out / "profile.csv")
    bench.emit_profile_svg(curves, out / "profile.svg")
    print(bench.format_stats(stats))


def cmd_profile(args):
    results = bench.read_results_csv(args.results)
    curves = bench.performance_profile(results)
    bench.emit_profile_svg(curves, args.out_svg)
    bench.emit_csv(curves, args.out_csv)
    print(bench.format_stats(bench.summarize_stats(results)))


def cmd_verify_equivalence(args):
    from .product_space import check_equivalence

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for trial in range(args.trials):
        n, m = int(rng.integers(1, 11)), int(rng.integers(1, 6))
        seed = int(rng.integers(2**31))
        inst = generate_ellipsoid_instance(n, m, seed)
        x0 = sample_infeasible_start(inst, seed, radius=10.0)
        for sched in (PowerLaw(1.0, 1.0), PowerLaw(1.0, 0.5)):
            err, _ = check_equivalence(inst, x0, sched, args.iters)
            worst = max(worst, err)
    ok = worst <= args.tol
    print(f"trials={args.trials} max_rel_error={worst:.3e} {'OK' if ok else 'FAIL'}")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="feaskit", description="Convex feasibility solvers and benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("generate", help="write a random ellipsoid instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_gen_params(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--algorithm", choices=[a.value for a in Algorithm], default="paca")
    p.add_argument("--schedule", default="powerlaw:nu=1,r=1")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--trace", metavar="FILE", default=None, help="write the report with per-step trace")
    p.add_argument("--x0-seed", type=int, default=0)
    p.add_argument("--x0-radius", type=float, default=1.0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run the benchmark suite")
    p.add_argument("--dims", type=_int_list, default=[20, 50])
    p.add_argument("--counts", type=_int_list, default=[5, 10, 20])
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--sequential", action="store_true")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--start-radius", type=float, default=10.0)
    p.add_argument("--max-iter", type=int, default=100_000)
    _add_gen_params(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("profile", help="performance profile from a results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--out-svg", required=True)
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=cmd_profile)

    # no help= keeps it out of the command listing
    p = sub.add_parser("verify-equivalence")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=25)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify_equivalence)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except (FeaskitError, OSError) as exc:
        print(f"feaskit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
