"""Regenerate the golden SVG fixtures from the hand-written CSV fixtures."""
import pathlib

from anglerealize.experiments import read_csv
from anglerealize.plotting import angle_distance_svg, discrepancy_svg

FIX = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def main():
    (FIX / "golden_discrepancy.svg").write_text(discrepancy_svg(read_csv(FIX / "small_discrepancy.csv")))
    (FIX / "golden_angle_vs_distance.svg").write_text(
        angle_distance_svg(read_csv(FIX / "small_angle_vs_distance.csv")))


if __name__ == "__main__":
    main()
