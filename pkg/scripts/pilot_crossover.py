"""Locate the angle-noise level where distance-based recovery overtakes angles.

Runs the angle-vs-distance study (N=5, side 1, sigma_d 1e-2) on a sigma_a
grid and freezes the grid and the first level at which the median angle MSE
reaches the median distance MSE into tests/fixtures/crossover.json.
"""
import argparse
import json
import pathlib
import time

import numpy as np

from anglerealize.experiments import ExperimentConfig, run_angle_vs_distance

OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "crossover.json"
GRID = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3]


def medians(records):
    angle = {s: float(np.nanmedian([r.accuracy_mse for r in records if r.mode == "angle" and r.sigma_a == s]))
             for s in GRID}
    dist = float(np.nanmedian([r.accuracy_mse for r in records if r.mode == "distance"]))
    return angle, dist


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=0)
    parser.add_argument("--out", default=str(OUT))
    args = parser.parse_args()
    config = ExperimentConfig(n_points=[5], side_length=[1.0], sigma_a=GRID, sigma_d=[1e-2],
                              n_trials=args.trials, seed=args.seed)
    start = time.perf_counter()
    angle, dist = medians(run_angle_vs_distance(config, workers=args.workers))
    crossover = next((s for s in GRID if angle[s] >= dist), None)
    result = {"n_points": 5, "side": 1.0, "sigma_d": 1e-2, "n_trials": args.trials, "seed": args.seed,
              "sigma_a_grid": GRID, "angle_median_mse": angle, "distance_median_mse": dist,
              "crossover_sigma_a": crossover, "runtime_s": round(time.perf_counter() - start, 1)}
    pathlib.Path(args.out).write_text(json.dumps(result, indent=2) + "\n")
    print(json.dumps(result, indent=2))


if __name__ == "__main__":
    main()
