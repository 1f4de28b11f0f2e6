import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anglerealize.experiments import (CSV_HEADER, CSVParseError, ExperimentConfig, TrialRecord,
                                      add_angle_noise, add_distance_noise, constraint_grid,
                                      read_csv, run_angle_vs_distance, run_discrepancy_experiment,
                                      trial_seed, write_csv)
from anglerealize.geometry import extract_angles, random_point_set
from anglerealize.reconstruction import distance_matrix


def _small(**kw):
    base = dict(n_points=[4], sigma_a=[1e-3], sigma_d=[1e-2], n_trials=2, seed=3, grid_size=4)
    base.update(kw)
    return ExperimentConfig(**base)


def test_header_columns():
    assert CSV_HEADER == ["experiment", "N", "side", "sigma_a", "sigma_d", "trial", "seed",
                          "n_constraints", "mode", "discrepancy_mae", "accuracy_mse", "converged",
                          "iterations", "runtime_s"]


def test_angle_noise_moments():
    theta = extract_angles(random_point_set(6, 1.0, 0))
    draws = np.concatenate([add_angle_noise(theta, 1e-2, s).values - theta.values for s in range(1700)])
    assert len(draws) >= 1e5
    assert abs(draws.mean()) < 0.02 * 1e-2
    assert draws.std() == pytest.approx(1e-2, rel=0.02)


def test_angle_noise_zero_and_clip():
    theta = extract_angles(random_point_set(4, 1.0, 0))
    assert add_angle_noise(theta, 0.0) is theta
    big = add_angle_noise(theta, 10.0, 1, margin=1e-3)
    assert big.values.min() >= 1e-3 and big.values.max() <= np.pi - 1e-3
    with pytest.raises(ValueError):
        add_angle_noise(theta, -1.0)


@pytest.mark.parametrize("on", ["distances", "squared"])
def test_distance_noise_symmetric(on):
    pts = random_point_set(5, 1.0, 0)
    sq = add_distance_noise(pts, 1e-2, 4, on)
    assert np.array_equal(sq, sq.T) and np.all(np.diag(sq) == 0) and np.all(sq >= 0)
    assert not np.array_equal(sq, distance_matrix(pts))


def test_distance_noise_moments():
    pts = random_point_set(5, 1.0, 0)
    true = np.sqrt(distance_matrix(pts))[np.triu_indices(5, 1)]
    err = np.concatenate([np.sqrt(add_distance_noise(pts, 1e-2, s))[np.triu_indices(5, 1)] - true
                          for s in range(10_000)])
    assert err.std() == pytest.approx(1e-2, rel=0.02)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 200), st.integers(0, 200), st.integers(0, 20))
def test_constraint_grid_properties(total, n_linear, size):
    n_linear = min(n_linear, total)
    grid = constraint_grid(total, n_linear, size)
    assert grid == sorted(set(grid))
    assert grid[0] == 0 and grid[-1] == total and n_linear in grid


def test_trial_seed_distinct_and_stable():
    seeds = {trial_seed(0, n, t) for n in range(3, 7) for t in range(50)}
    assert len(seeds) == 200
    assert trial_seed(5, 1, 2) == trial_seed(5, 1, 2)


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(constraint_mode="bogus")
    with pytest.raises(ValueError):
        ExperimentConfig(n_trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(sigma_a=[-1.0])
    path = tmp_path / "c.json"
    path.write_text('{"n_points": [4], "extra": 1}')
    with pytest.raises(ValueError, match="unknown"):
        ExperimentConfig.from_json(path)
    cfg = _small(constraint_mode="both")
    assert cfg.modes == ["analytic", "learned"]
    path.write_text(cfg.to_json())
    assert ExperimentConfig.from_json(path) == cfg


def test_discrepancy_rows():
    recs = run_discrepancy_experiment(_small(constraint_mode="both"))
    assert {r.mode for r in recs} == {"analytic", "learned"}
    full = [r for r in recs if r.n_constraints == max(x.n_constraints for x in recs if x.mode == r.mode)]
    assert all(r.discrepancy_mae < 1e-6 for r in full)
    assert all(r.runtime_s is None for r in recs)


def test_angle_vs_distance_rows():
    recs = run_angle_vs_distance(_small(sigma_a=[1e-4, 1e-2]))
    angle = [r for r in recs if r.mode == "angle"]
    dist = [r for r in recs if r.mode == "distance"]
    assert len(angle) == 4 and len(dist) == 2
    assert all(r.sigma_d == 0 for r in angle) and all(r.sigma_a == 0 for r in dist)
    assert all(math.isnan(r.discrepancy_mae) for r in dist)


def test_workers_do_not_change_output(tmp_path):
    cfg = _small(n_trials=3)
    write_csv(run_discrepancy_experiment(cfg, workers=0), tmp_path / "a.csv")
    write_csv(run_discrepancy_experiment(cfg, workers=2), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_runtime_recorded_on_request():
    recs = run_angle_vs_distance(_small(n_trials=1, record_runtime=True))
    assert all(r.runtime_s is not None and r.runtime_s >= 0 for r in recs)


def test_csv_round_trip(tmp_path):
    recs = run_angle_vs_distance(_small(n_trials=1))
    write_csv(recs, tmp_path / "r.csv")
    back = read_csv(tmp_path / "r.csv")
    assert len(back) == len(recs)
    for a, b in zip(recs, back):
        for name in CSV_HEADER:
            x, y = getattr(a, name), getattr(b, name)
            assert (isinstance(x, float) and math.isnan(x) and math.isnan(y)) or x == y


@pytest.mark.parametrize("content, line", [
    ("", 1),
    ("a,b\n", 1),
    (",".join(CSV_HEADER) + "\n", 2),
    (",".join(CSV_HEADER) + "\nx,1\n", 2),
    (",".join(CSV_HEADER) + "\n" + "discrepancy,5,1.0,0.001,0.0,0,1,3,analytic,0.1,0.1,2,4,\n", 2),
    (",".join(CSV_HEADER) + "\n" + "discrepancy,5,1.0,0.001,0.0,0,1,3,analytic,0.1,0.1,1,4,\n"
     + "discrepancy,five,1.0,0.001,0.0,0,1,3,analytic,0.1,0.1,1,4,\n", 3),
])
def test_csv_errors_name_line(tmp_path, content, line):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(CSVParseError, match=f"line {line}"):
        read_csv(path)


def test_record_row_format():
    rec = TrialRecord("discrepancy", 5, 1.0, 1e-3, 0.0, 0, 7, 3, "analytic", 0.1, math.nan, True, 4)
    assert rec.as_row()[-3:] == ["1", "4", ""]
    assert rec.as_row()[3] == "0.001"


def test_full_constraints_beat_none_every_trial():
    recs = run_discrepancy_experiment(_small(n_points=[5], n_trials=5, grid_size=0))
    for t in range(5):
        rows = sorted((r for r in recs if r.trial == t), key=lambda r: r.n_constraints)
        assert rows[0].n_constraints == 0
        assert rows[0].discrepancy_mae > rows[-1].discrepancy_mae


def test_row_count():
    cfg = _small(n_points=[4, 5], n_trials=3, grid_size=4)
    recs = run_discrepancy_experiment(cfg)
    # grid for N=4: {0, 3, 5, 8} plus L=7; N=5: {0, 9, 17, 26} plus L=21
    assert len(recs) == 3 * (5 + 5)


def test_larger_area_is_less_accurate():
    cfg = ExperimentConfig(n_points=[5], side_length=[1.0, 10.0], sigma_a=[1e-3, 1e-2], sigma_d=[1e-2],
                           n_trials=10, seed=1)
    recs = run_angle_vs_distance(cfg)
    for sa in cfg.sigma_a:
        med = [np.median([r.accuracy_mse for r in recs if r.mode == "angle" and r.side == s and r.sigma_a == sa])
               for s in cfg.side_length]
        assert med[0] <= med[1]
