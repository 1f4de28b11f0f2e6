import json
import pathlib

import numpy as np
import pytest

from anglerealize.constraints import analytic_linear_system
from anglerealize.errors import SamplingError
from anglerealize.geometry import equivalency_class, extract_angles, random_point_set
from anglerealize.learned import (SampleMatrix, learn_constraints, learned_linear_system,
                                  null_space_dimension, sample_class_angles)

ORACLES = json.loads((pathlib.Path(__file__).parent / "fixtures" / "oracles.json").read_text())


@pytest.fixture(scope="module")
def rep5():
    return random_point_set(5, 1.0, 21)


def test_samples_stay_in_class(rep5):
    cls = equivalency_class(rep5)
    s = sample_class_angles(cls, rep5, 40, rng_seed=0)
    assert s.rows.shape == (40, 31)
    assert np.all(s.rows[:, -1] == -1.0)


def test_sampling_deterministic(rep5):
    cls = equivalency_class(rep5)
    a = sample_class_angles(cls, rep5, 10, rng_seed=3)
    b = sample_class_angles(cls, rep5, 10, rng_seed=3)
    assert np.array_equal(a.rows, b.rows)


def test_sampling_budget_exhausted():
    rep = random_point_set(4, 1.0, 0)
    with pytest.raises(SamplingError):
        sample_class_angles(equivalency_class(rep), rep, 50, rng_seed=0, max_attempts=20)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_null_dimension_matches_oracle(n):
    system = learned_linear_system(random_point_set(n, 1.0, 7 * n), rng_seed=0)
    assert system.n_rows == ORACLES["class_null_dimension"][str(n)]
    assert system.metadata["gap"] >= 1e3


def test_learned_rows_annihilate_held_out(rep5):
    cls = equivalency_class(rep5)
    system = learned_linear_system(rep5, rng_seed=1)
    held = sample_class_angles(cls, rep5, 50, rng_seed=99)
    assert np.abs(held.angles @ system.a_matrix.T - system.b_vector).max() <= 1e-7


def test_learned_span_equals_analytic_span(rep5):
    learned = learned_linear_system(rep5, rng_seed=2)
    analytic = analytic_linear_system(rep5)
    aug_l = np.c_[learned.a_matrix, learned.b_vector]
    aug_a = np.c_[analytic.a_matrix, analytic.b_vector]
    # each analytic row lies in the learned row space
    coef, *_ = np.linalg.lstsq(aug_l.T, aug_a.T, rcond=None)
    assert np.abs(aug_l.T @ coef - aug_a.T).max() < 1e-8


def test_rows_ordered_by_singular_value(rep5):
    cls = equivalency_class(rep5)
    samples = sample_class_angles(cls, rep5, 80, rng_seed=4)
    with pytest.warns(RuntimeWarning):
        system = learn_constraints(samples, n_constraints=25)
    rows = np.c_[system.a_matrix, system.b_vector]
    norms = np.linalg.norm(samples.angles @ system.a_matrix.T - system.b_vector, axis=0)
    assert np.all(np.diff(norms) >= -1e-12)
    np.testing.assert_allclose(np.linalg.norm(rows, axis=1), 1.0)


def test_overshoot_warns_about_gap(rep5):
    cls = equivalency_class(rep5)
    samples = sample_class_angles(cls, rep5, 80, rng_seed=4)
    with pytest.warns(RuntimeWarning, match="ill-separated"):
        learn_constraints(samples, n_constraints=22)


def test_too_few_samples_rejected(rep5):
    samples = sample_class_angles(equivalency_class(rep5), rep5, 5, rng_seed=0)
    with pytest.raises(ValueError):
        learn_constraints(samples, n_constraints=10)


def test_null_dimension_of_empty_matrix(rep5):
    empty = SampleMatrix(np.zeros((0, 31)), equivalency_class(rep5))
    assert null_space_dimension(empty) == 31


def test_true_angles_satisfy_learned(rep5):
    system = learned_linear_system(rep5, rng_seed=5)
    assert np.abs(system.residual(extract_angles(rep5))).max() < 1e-9
