"""Command-line entry point: ``anglerealize <subcommand> ...``."""
from __future__ import annotations

import argparse
import sys

from . import io
from .constraints import analytic_linear_system, enumerate_quads, system_to_json
from .denoise import DenoiseProblem, SolverOptions, denoise_with_constraint_prefix
from .experiments import (ExperimentConfig, add_angle_noise, run_angle_vs_distance,
                          run_discrepancy_experiment, write_csv)
from .geometry import MIN_ANGLE, extract_angles, random_point_set
from .learned import learned_linear_system
from .plotting import emit_plots
from .reconstruction import build_up, procrustes_align


def _emit(obj, out):
    text = io.dump_json(obj, out)
    if out is None:
        sys.stdout.write(text)


def _linear(mode, representative, seed):
    if mode == "analytic":
        return analytic_linear_system(representative)
    return learned_linear_system(representative, rng_seed=seed)


def cmd_gen(args):
    pts = random_point_set(args.n, args.side, args.seed, args.min_angle)
    _emit(io.point_set_to_json(pts), args.out)


def cmd_angles(args):
    pts = io.point_set_from_json(io.load_json(args.points))
    _emit(io.angles_to_json(extract_angles(pts, args.min_angle)), args.out)


def cmd_noise(args):
    theta = io.angles_from_json(io.load_json(args.angles))
    _emit(io.angles_to_json(add_angle_noise(theta, args.sigma_a, args.seed)), args.out)


def cmd_denoise(args):
    theta = io.angles_from_json(io.load_json(args.angles))
    rep = io.point_set_from_json(io.load_json(args.representative))
    options = SolverOptions(max_iterations=args.max_iter, constraint_tolerance=args.tol)
    problem = DenoiseProblem(theta, _linear(args.mode, rep, args.seed), enumerate_quads(theta.n_points), options)
    count = problem.n_constraints if args.constraints == "all" else int(args.constraints)
    result = denoise_with_constraint_prefix(problem, count)
    _emit(io.angles_to_json(result.denoised_angles, converged=result.converged,
                            iterations=result.iterations,
                            constraint_violation=result.constraint_violation,
                            n_constraints=count), args.out)
    if not result.converged:
        print(f"warning: solver did not converge ({result.message})", file=sys.stderr)


def cmd_reconstruct(args):
    theta = io.angles_from_json(io.load_json(args.angles))
    pts = build_up(theta)
    out = io.point_set_to_json(pts)
    if args.align_to:
        ref = io.point_set_from_json(io.load_json(args.align_to))
        tf, mse = procrustes_align(pts, ref, allow_scale=True)
        out["points"] = tf.apply(pts).tolist()
        out["mse"] = mse
    _emit(out, args.out)


def cmd_constraints(args):
    rep = io.point_set_from_json(io.load_json(args.representative))
    _emit(system_to_json(_linear(args.mode, rep, args.seed)), args.out)


def cmd_experiment(args):
    config = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    runner = run_discrepancy_experiment if args.kind == "discrepancy" else run_angle_vs_distance
    write_csv(runner(config, workers=args.workers), args.out)


def cmd_plot(args):
    for path in emit_plots(args.csv_in, args.out_dir):
        print(path)


def build_parser():
    parser = argparse.ArgumentParser(prog="anglerealize", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="random non-degenerate point set -> JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--side", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-angle", type=float, default=MIN_ANGLE)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("angles", help="point JSON -> angle JSON")
    p.add_argument("points")
    p.add_argument("--min-angle", type=float, default=MIN_ANGLE)
    p.add_argument("--out")
    p.set_defaults(func=cmd_angles)

    p = sub.add_parser("noise", help="add Gaussian angle noise")
    p.add_argument("angles")
    p.add_argument("--sigma-a", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("denoise", help="project angles onto the realizable set")
    p.add_argument("angles")
    p.add_argument("--representative", required=True,
                   help="point JSON fixing the equivalency class")
    p.add_argument("--mode", choices=["analytic", "learned"], default="analytic")
    p.add_argument("--constraints", default="all", help="constraint count or 'all'")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0, help="sampling seed for --mode learned")
    p.add_argument("--out")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("reconstruct", help="angle JSON -> point JSON via build-up")
    p.add_argument("angles")
    p.add_argument("--align-to")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("constraints", help="dump the linear constraint system as JSON")
    p.add_argument("representative")
    p.add_argument("--mode", choices=["analytic", "learned"], default="analytic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_constraints)

    p = sub.add_parser("experiment", help="run a Monte-Carlo study -> CSV")
    p.add_argument("kind", choices=["discrepancy", "angle-vs-distance"])
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=0)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("plot", help="CSV -> SVG plots")
    p.add_argument("--in", dest="csv_in", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
