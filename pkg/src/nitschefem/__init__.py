"""Non-symmetric Nitsche finite elements for the Poisson problem.

Continuous Lagrange elements of degree 1 to 3 on structured simplicial meshes
of the unit square and cube, Dirichlet data imposed weakly, and a convergence
study harness around them.
"""
from .assembly import (
    LinearSystem,
    NitscheConfig,
    apply_form,
    assemble_matrix,
    assemble_rhs,
    assemble_system,
    structure_check,
    write_matrix_market,
)
from .element import QuadratureRule, ReferenceElement, face_quadrature, reference_element, volume_quadrature
from .interpolation import BoundaryProjection, interpolation_rate_study, modified_interpolant, orthogonality_residual
from .mesh import Mesh, build_mesh, mesh_from_cells, validate, write_vtk
from .norms import ErrorReport, ExactSolution, boundary_weighted_error, error_report, h1_semi_error, l2_error
from .solutions import get_solution
from .solver import ConvergenceError, SingularMatrixError, SolveStats, solve, solve_direct, solve_krylov
from .space import DofMap, build_space, nodal_interpolant
from .study import StudyConfig, StudyTable, compute_rates, emit, read_csv, run_study

__version__ = "0.1.0"

__all__ = [
    "BoundaryProjection", "ConvergenceError", "DofMap", "ErrorReport", "ExactSolution",
    "LinearSystem", "Mesh", "NitscheConfig", "QuadratureRule", "ReferenceElement",
    "SingularMatrixError", "SolveStats", "StudyConfig", "StudyTable",
    "apply_form", "assemble_matrix", "assemble_rhs", "assemble_system", "boundary_weighted_error",
    "build_mesh", "build_space", "compute_rates", "emit", "error_report", "face_quadrature",
    "get_solution", "h1_semi_error", "interpolation_rate_study", "l2_error", "mesh_from_cells",
    "modified_interpolant", "nodal_interpolant", "orthogonality_residual", "read_csv",
    "reference_element", "run_study", "solve", "solve_direct", "solve_krylov", "structure_check",
    "validate", "volume_quadrature", "write_matrix_market", "write_vtk",
]
