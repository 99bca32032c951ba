"""Interpolant with boundary DOFs fixed by a (weighted) boundary L2 projection.

Interior DOFs take nodal values.  The DOFs on the boundary solve

    <h^-alpha I u, v>_boundary = <h^-alpha u, v>_boundary   for all v in V_h

(``variant="weighted"``) or the same relation without the weight
(``variant="plain"``, used with the penalty-free method).  Only boundary basis
functions have nonzero traces, so this is a small SPD system on the boundary
DOFs alone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .assembly import _Geometry, _eval, local_boundary_matrices
from .mesh import build_mesh
from .norms import ExactSolution, boundary_grad_error, boundary_l2_error, l2_error
from .space import DofMap, build_space, nodal_interpolant
from .study import compute_rates

VARIANTS = ("weighted", "plain")
MAX_CONDITION = 1e14


@dataclass(frozen=True)
class BoundaryProjection:
    variant: str = "weighted"
    alpha: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    def face_weights(self, space: DofMap) -> np.ndarray:
        h = space.mesh.boundary_faces.diameter
        return h ** (-self.alpha) if self.variant == "weighted" else np.ones_like(h)

    def boundary_mass(self, space: DofMap, degree: int | None = None) -> sp.csr_matrix:
        """Weighted boundary mass matrix restricted to the boundary DOFs."""
        M, _ = local_boundary_matrices(space, degree)
        M = M * self.face_weights(space)[:, None, None]
        fd = space.cell_to_dofs[space.mesh.boundary_faces.cell]
        nb = fd.shape[1]
        n = space.num_dofs
        full = sp.coo_matrix(
            (M.ravel(), (np.repeat(fd, nb, axis=1).ravel(), np.tile(fd, (1, nb)).ravel())), shape=(n, n)
        ).tocsr()
        bd = space.boundary_dofs
        return full[bd][:, bd]


def boundary_load(space: DofMap, u, weights: np.ndarray, degree: int | None = None) -> np.ndarray:
    """``<w u, phi_i>_boundary`` for every global DOF ``i``."""
    geo = _Geometry(space)
    degree = 2 * space.degree + 2 if degree is None else degree
    faces = geo.faces
    out = np.zeros(space.num_dofs)
    for ids, phi, _, _, x, w in geo.face_groups(degree):
        ux = _eval(u, x)
        local = np.einsum("fq,fq,qa->fa", w * weights[ids][:, None], ux, phi)
        out += np.bincount(space.cell_to_dofs[faces.cell[ids]].ravel(), local.ravel(), minlength=space.num_dofs)
    return out


def modified_interpolant(space: DofMap, exact, proj: BoundaryProjection, degree: int | None = None) -> np.ndarray:
    """Coefficients of the interpolant of ``exact`` (an ``ExactSolution`` or value callback)."""
    u = exact.value if isinstance(exact, ExactSolution) else exact
    coeffs = nodal_interpolant(space, u)
    # the mass matrix integrand has degree 2k, so the default degree is exact for it
    mass = proj.boundary_mass(space, degree).toarray()
    rhs = boundary_load(space, u, proj.face_weights(space), degree)[space.boundary_dofs]
    ev = scipy.linalg.eigvalsh(mass)
    if ev[0] <= 0 or ev[-1] / ev[0] > MAX_CONDITION:
        raise np.linalg.LinAlgError(f"boundary mass matrix is singular or ill-conditioned (eigenvalues {ev[0]:.3e}..{ev[-1]:.3e})")
    coeffs[space.boundary_dofs] = scipy.linalg.cho_solve(scipy.linalg.cho_factor(mass), rhs)
    return coeffs


def orthogonality_residual(space: DofMap, exact, coeffs, proj: BoundaryProjection, degree: int | None = None) -> float:
    """``max_i |<w (u - I u), phi_i>|`` over the boundary basis functions.

    Evaluated facet by facet from the field values, independently of the
    assembled mass matrix.
    """
    u = exact.value if isinstance(exact, ExactSolution) else exact
    geo = _Geometry(space)
    degree = 2 * space.degree + 2 if degree is None else degree
    faces = geo.faces
    weights = proj.face_weights(space)
    c = np.asarray(coeffs)
    out = np.zeros(space.num_dofs)
    for ids, phi, _, _, x, w in geo.face_groups(degree):
        fd = space.cell_to_dofs[faces.cell[ids]]
        diff = _eval(u, x) - c[fd] @ phi.T
        local = np.einsum("fq,fq,qa->fa", w * weights[ids][:, None], diff, phi)
        out += np.bincount(fd.ravel(), local.ravel(), minlength=space.num_dofs)
    return float(np.abs(out[space.boundary_dofs]).max())


@dataclass
class InterpolationRow:
    level: int
    h: float
    dofs: int
    l2: float
    l2_rate: float | None
    bnd_l2: float
    bnd_rate: float | None
    bnd_grad: float
    bnd_grad_rate: float | None
    orth_residual: float


@dataclass
class InterpolationTable:
    rows: list

    columns = (
        "level", "h", "dofs", "l2", "l2_rate", "bnd_l2", "bnd_rate",
        "bnd_grad", "bnd_grad_rate", "orth_residual",
    )

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]


def interpolation_rate_study(
    dim: int,
    k: int,
    levels,
    exact: ExactSolution,
    alpha: float = 1.0,
    variant: str = "weighted",
    grading: float = 1.0,
) -> InterpolationTable:
    """Errors of the modified interpolant over a refinement sequence.

    Reports ``||u - I u||_0``, ``||u - I u||_{0,boundary}`` and
    ``||grad(u - I u)||_{0,boundary}`` with pairwise rates, plus the largest
    orthogonality residual of the boundary projection.
    """
    levels = list(levels)
    if len(levels) < 3:
        raise ValueError("an interpolation rate study needs at least three levels")
    proj = BoundaryProjection(variant, alpha)
    raw = []
    for level in levels:
        space = build_space(build_mesh(dim, level, grading), k)
        c = modified_interpolant(space, exact, proj)
        raw.append(
            (
                level,
                2.0**-level,
                space.num_dofs,
                l2_error(space, c, exact),
                boundary_l2_error(space, c, exact),
                boundary_grad_error(space, c, exact),
                orthogonality_residual(space, exact, c, proj),
            )
        )
    l2r = compute_rates([r[3] for r in raw])
    br = compute_rates([r[4] for r in raw])
    gr = compute_rates([r[5] for r in raw])
    rows = [
        InterpolationRow(lv, h, n, l2, l2r[i], b, br[i], g, gr[i], orth)
        for i, (lv, h, n, l2, b, g, orth) in enumerate(raw)
    ]
    return InterpolationTable(rows)
