"""Run the angle-vs-distance study from a JSON config and render its plots."""
import argparse
import pathlib
import time

from anglerealize.experiments import ExperimentConfig, run_angle_vs_distance as run, write_csv
from anglerealize.plotting import emit_plots

ROOT = pathlib.Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(ROOT / "configs" / "angle_vs_distance.json"))
    parser.add_argument("--out-dir", default=str(ROOT / "results"))
    parser.add_argument("--workers", type=int, default=0)
    args = parser.parse_args()
    out = pathlib.Path(args.out_dir)
    start = time.perf_counter()
    records = run(ExperimentConfig.from_json(args.config), workers=args.workers)
    write_csv(records, out / "angle_vs_distance.csv")
    print(f"{len(records)} rows in {time.perf_counter() - start:.1f}s -> {out / 'angle_vs_distance.csv'}")
    for path in emit_plots(out / "angle_vs_distance.csv", out):
        print(path)


if __name__ == "__main__":
    main()
