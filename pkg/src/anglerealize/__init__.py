"""Realizability, denoising and recovery of planar inner-angle measurements."""
from .constraints import (LinearConstraintSystem, QuadrilateralConstraintSet, analytic_linear_system,
                          assemble_linear_system, build_single_constraints, build_triangle_constraints,
                          enumerate_quads, quad_jacobian, quad_residual)
from .denoise import (DenoiseProblem, DenoiseResult, SolverOptions, denoise,
                      denoise_with_constraint_prefix)
from .geometry import (AngleVector, EquivalencyClass, PointSet, TripletIndexer, dof,
                       equivalency_class, extract_angles, inner_angle, min_measurement_count,
                       random_point_set, triplet_count)
from .learned import SampleMatrix, learn_constraints, learned_linear_system, sample_class_angles
from .reconstruction import (SimilarityTransform, build_up, classic_mds, discrepancy,
                             procrustes_align, triangulate)

__version__ = "0.1.0"
