import json
import pathlib
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anglerealize.constraints import (LinearConstraintSystem, analytic_linear_system,
                                      assemble_linear_system, build_single_constraints,
                                      build_triangle_constraints, enumerate_quads,
                                      expected_linear_rank, nominal_linear_rank, numerical_rank,
                                      quad_jacobian, quad_residual, system_from_json,
                                      system_to_json)
from anglerealize.errors import SingularConstraintError
from anglerealize.geometry import (AngleVector, PointSet, TripletIndexer, equivalency_class,
                                   extract_angles, random_point_set, triplet_count)
from anglerealize.learned import sample_class_angles

from conftest import point_sets

ORACLES = json.loads((pathlib.Path(__file__).parent / "fixtures" / "oracles.json").read_text())


@pytest.mark.parametrize("n", [4, 5, 6])
def test_single_rows_hold_across_class(n):
    rep = random_point_set(n, 1.0, 100 + n)
    rows = build_single_constraints(equivalency_class(rep), rep)
    assert rows
    samples = sample_class_angles(equivalency_class(rep), rep, 30, rng_seed=1)
    for theta in samples.angles:
        for row in rows:
            lhs = sum(c * theta[m] for m, c in row.coeffs.items())
            assert lhs == pytest.approx(row.b, abs=1e-12)


def test_square_single_rows(square):
    ix = TripletIndexer(4)
    rows = build_single_constraints(equivalency_class(square), square)
    sums = {frozenset(r.coeffs.items()): r.b for r in rows}
    # at node 0 the two 45 degree gaps make up the right angle between 1 and 3
    key = frozenset({ix(0, 1, 2): 1.0, ix(0, 2, 3): 1.0, ix(0, 1, 3): -1.0}.items())
    assert sums[key] == 0.0


def test_single_rows_reject_foreign_representative(square):
    other = PointSet([[0, 0], [1, 0], [0.4, 0.3], [0, 1]])
    with pytest.raises(ValueError):
        build_single_constraints(equivalency_class(square), other)


def test_triangle_rows():
    rows = build_triangle_constraints(5)
    assert len(rows) == comb(4, 2)
    assert all(r.b == np.pi and len(r.coeffs) == 3 for r in rows)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_rank_matches_class_null_dimension_oracle(n):
    system = analytic_linear_system(random_point_set(n, 1.0, n))
    assert system.n_rows == system.metadata["achieved_rank"]
    assert system.n_rows == expected_linear_rank(n) == ORACLES["class_null_dimension"][str(n)]


def test_nominal_rank_exceeds_true_rank_only_with_redundant_quads():
    for n in range(3, 9):
        # locally only C(N-2, 2) of the C(N, 4) quads are independent
        independent_quads = comb(n - 2, 2)
        assert triplet_count(n) - (2 * n - 4) - independent_quads == expected_linear_rank(n)
        assert nominal_linear_rank(n) <= expected_linear_rank(n)


def test_assemble_target_rank_truncates_and_warns():
    rep = random_point_set(5, 1.0, 2)
    cls = equivalency_class(rep)
    single, tri = build_single_constraints(cls, rep), build_triangle_constraints(5)
    short = assemble_linear_system(single, tri, 30, target_rank=10)
    assert short.n_rows == 10 and numerical_rank(short.a_matrix) == 10
    with pytest.warns(RuntimeWarning, match="rank deficit"):
        over = assemble_linear_system(single, tri, 30, target_rank=25)
    assert over.n_rows == 21 and over.metadata["warnings"]


def test_assemble_empty():
    system = assemble_linear_system([], [], 3)
    assert system.n_rows == 0 and system.a_matrix.shape == (0, 3)


@settings(max_examples=40, deadline=None)
@given(point_sets(n_min=4, n_max=6))
def test_linear_and_quad_residuals_vanish(points):
    theta = extract_angles(points)
    system = analytic_linear_system(points)
    assert np.abs(system.residual(theta)).max() <= 1e-9
    assert np.abs(enumerate_quads(points.n).residuals(theta)).max() <= 1e-9


def test_quad_residual_detects_perturbation():
    theta = extract_angles(random_point_set(4, 1.0, 0))
    vals = theta.values.copy()
    vals[enumerate_quads(4).num_index[0, 0]] += 1e-3
    assert abs(quad_residual(AngleVector(theta.indexer, vals), (0, 1, 2, 3))) > 1e-6


def test_quad_count():
    assert len(enumerate_quads(3)) == 0
    assert len(enumerate_quads(6)) == comb(6, 4)


def _central_difference(theta, quad, h=1e-6):
    grad = np.zeros(len(theta))
    for m in range(len(theta)):
        up, dn = theta.values.copy(), theta.values.copy()
        up[m] += h
        dn[m] -= h
        grad[m] = (quad_residual(AngleVector(theta.indexer, up), quad)
                   - quad_residual(AngleVector(theta.indexer, dn), quad)) / (2 * h)
    return grad


@pytest.mark.parametrize("seed", range(5))
def test_quad_jacobian_finite_difference(seed):
    theta = extract_angles(random_point_set(5, 1.0, seed))
    quads = enumerate_quads(5)
    dense = quads.jacobian(theta)
    for r, quad in enumerate(quads.quads):
        idx, vals = quad_jacobian(theta, quad)
        assert len(idx) == 6
        fd = _central_difference(theta, quad)
        np.testing.assert_allclose(vals, fd[idx], rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(dense[r], fd, rtol=1e-6, atol=1e-9)


def test_log_form_matches_residuals():
    rng = np.random.default_rng(0)
    theta = extract_angles(random_point_set(5, 1.0, 9)).values + rng.normal(0, 1e-2, 30)
    quads = enumerate_quads(5)
    np.testing.assert_allclose(quads.log_residuals(theta), np.log1p(quads.residuals(theta)), atol=1e-14)
    f1 = quads.residuals(theta) + 1
    np.testing.assert_allclose(quads.log_jacobian(theta), quads.jacobian(theta) / f1[:, None], rtol=1e-12)


def test_quad_singular_at_zero_angle():
    theta = extract_angles(random_point_set(4, 1.0, 0)).values.copy()
    theta[enumerate_quads(4).num_index[0, 0]] = 0.0
    with pytest.raises(SingularConstraintError):
        enumerate_quads(4).residuals(theta)


def test_json_round_trip():
    system = analytic_linear_system(random_point_set(5, 1.0, 4))
    back = system_from_json(json.loads(json.dumps(system_to_json(system))))
    assert np.array_equal(back.a_matrix, system.a_matrix)
    assert np.array_equal(back.b_vector, system.b_vector)
    assert back.row_tags == system.row_tags


def test_json_rejects_row_count_mismatch():
    obj = system_to_json(analytic_linear_system(random_point_set(4, 1.0, 4)))
    obj["L"] += 1
    with pytest.raises(ValueError):
        system_from_json(obj)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 21))
def test_prefix_is_leading_rows(seed, count):
    system = analytic_linear_system(random_point_set(5, 1.0, seed))
    pre = system.prefix(count)
    assert pre.n_rows == min(count, system.n_rows)
    assert np.array_equal(pre.a_matrix, system.a_matrix[:count])


def test_empty_system_residual():
    assert LinearConstraintSystem.empty(12).residual(np.zeros(12)).shape == (0,)
