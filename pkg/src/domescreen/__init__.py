"""Safe lasso screening with a sphere intersected with half-spaces.

The support function of the region is computed in the span of the half-space
normals, so each feature costs a solve in ``m + 1`` dimensions instead of ``n``.
"""

from .geometry import (GeometryError, NormalizedRegion, ProjectedFeature, ProjectionBasis,
                       Region, make_symmetry_rotation, normalize, orthonormal_basis, project,
                       random_region)
from .lasso import LassoInstance, LassoSolution, compute_lambda_max, solve_lasso
from .screening import ScreeningReport, screen, sphere_bound, verify_screening
from .solvers import (Feasibility, SolveResult, Status, closed_form_one_dome, feasibility_check,
                      solve_dual, solve_full, solve_lifted, solve_reduced)

__all__ = [
    "GeometryError", "NormalizedRegion", "ProjectedFeature", "ProjectionBasis", "Region",
    "make_symmetry_rotation", "normalize", "orthonormal_basis", "project", "random_region",
    "LassoInstance", "LassoSolution", "compute_lambda_max", "solve_lasso",
    "ScreeningReport", "screen", "sphere_bound", "verify_screening",
    "Feasibility", "SolveResult", "Status", "closed_form_one_dome", "feasibility_check",
    "solve_dual", "solve_full", "solve_lifted", "solve_reduced",
]
