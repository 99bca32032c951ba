"""Assembly of the Nitsche discretisation of -lap u = f, u = g on the boundary.

The bilinear form is

    a(u, v) = (grad u, grad v) - <grad u . n, v> + beta <u, grad v . n>
              + c0 <h^-alpha u, v>

and the right-hand side

    L(v) = (f, v) + beta <g, grad v . n> + c0 <h^-alpha g, v>

where ``<., .>`` integrates over the boundary and ``h`` is the diameter of
each boundary facet.  ``beta = +1`` is the non-symmetric method (coercive for
any ``c0 >= 0``), ``beta = -1`` the classical symmetric one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp

from .element import (
    affine_maps,
    face_points_in_cell,
    face_quadrature,
    reference_measure,
    volume_quadrature,
)
from .space import DofMap


@dataclass(frozen=True)
class NitscheConfig:
    """Scheme parameters; ``c0=None`` selects ``10 k**2`` in symmetric mode."""

    beta: int = 1
    alpha: float = 1.0
    c0: float | None = 1.0

    def __post_init__(self):
        if self.beta not in (-1, 1):
            raise ValueError(f"beta must be -1 or +1, got {self.beta}")
        if not self.alpha >= 1.0:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if self.c0 is None:
            if self.beta == 1:
                raise ValueError("c0 must be given for the non-symmetric method")
        elif self.c0 < 0:
            raise ValueError(f"c0 must be >= 0, got {self.c0}")
        elif self.beta == -1 and self.c0 == 0:
            raise ValueError("the symmetric method (beta=-1) needs a positive penalty c0")

    def penalty(self, k: int) -> float:
        return 10.0 * k * k if self.c0 is None else float(self.c0)


@dataclass(frozen=True)
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray

    def __post_init__(self):
        if self.rhs.shape[0] != self.matrix.shape[0]:
            raise ValueError("rhs length does not match the matrix dimension")


class _Geometry:
    """Per-cell affine data and tabulated reference bases shared by the kernels."""

    def __init__(self, space: DofMap):
        mesh = space.mesh
        self.space = space
        self.dim = mesh.dim
        self.B, self.b, self.det, self.invT = affine_maps(mesh.vertices, mesh.cells)
        self.faces = mesh.boundary_faces

    def volume(self, degree: int, with_grad: bool = True):
        """``(phi, grad, x, wdet)``; ``grad[c, q, b, i]`` is skipped (``None``) unless requested."""
        q = volume_quadrature(self.dim, degree)
        elem = self.space.element
        phi = elem.tabulate(q.points)
        grad = None
        if with_grad:
            ref = elem.tabulate_grad(q.points)
            nq, nb, d = ref.shape
            grad = (ref.reshape(nq * nb, d) @ np.swapaxes(self.invT, 1, 2)).reshape(-1, nq, nb, d)
        x = q.points @ np.swapaxes(self.B, 1, 2) + self.b[:, None, :]
        wdet = q.weights[None, :] * self.det[:, None]
        return phi, grad, x, wdet

    def face_groups(self, degree: int):
        """Yield ``(face_ids, phi, grad, grad_n, x, w)`` for each local-face index."""
        q = face_quadrature(self.dim, degree)
        elem = self.space.element
        fm = reference_measure(self.dim - 1)
        faces = self.faces
        for lf in range(self.dim + 1):
            ids = np.flatnonzero(faces.local_face == lf)
            if len(ids) == 0:
                continue
            xi = face_points_in_cell(self.dim, lf, q.points)
            phi = elem.tabulate(xi)
            cells = faces.cell[ids]
            grad = np.einsum("fij,qbj->fqbi", self.invT[cells], elem.tabulate_grad(xi))
            grad_n = np.einsum("fqbi,fi->fqb", grad, faces.normal[ids])
            x = np.einsum("fij,qj->fqi", self.B[cells], xi) + self.b[cells][:, None, :]
            w = q.weights[None, :] * (faces.area[ids] / fm)[:, None]
            yield ids, phi, grad, grad_n, x, w


def _eval(fn, x: np.ndarray) -> np.ndarray:
    """Evaluate a vectorised callback on points of shape ``(..., d)``."""
    flat = x.reshape(-1, x.shape[-1])
    vals = np.asarray(fn(flat), dtype=float)
    return vals.reshape(x.shape[:-1] + vals.shape[1:])


def local_volume_matrices(space: DofMap, degree: int | None = None) -> np.ndarray:
    """Element stiffness matrices ``(ncells, nb, nb)``."""
    geo = _Geometry(space)
    degree = 2 * space.degree if degree is None else degree
    _, grad, _, wdet = geo.volume(degree)
    return np.einsum("cq,cqai,cqbi->cab", wdet, grad, grad)


def local_boundary_matrices(space: DofMap, degree: int | None = None):
    """Facet matrices ``(M, D)`` in boundary-face order.

    ``M[f, i, j] = <phi_i, phi_j>_F`` and ``D[f, i, j] = <grad phi_j . n, phi_i>_F``.
    """
    geo = _Geometry(space)
    degree = 2 * space.degree if degree is None else degree
    nf, nb = len(geo.faces), space.element.num_nodes
    M = np.zeros((nf, nb, nb))
    D = np.zeros((nf, nb, nb))
    for ids, phi, _, grad_n, _, w in geo.face_groups(degree):
        M[ids] = np.einsum("fq,qa,qb->fab", w, phi, phi)
        D[ids] = np.einsum("fq,qa,fqb->fab", w, phi, grad_n)
    return M, D


def _scatter(space: DofMap, vol: np.ndarray, bnd: np.ndarray) -> sp.csr_matrix:
    n = space.num_dofs
    cd = space.cell_to_dofs
    fd = cd[space.mesh.boundary_faces.cell]
    nb = cd.shape[1]
    rows = np.concatenate([np.repeat(cd, nb, axis=1).ravel(), np.repeat(fd, nb, axis=1).ravel()])
    cols = np.concatenate([np.tile(cd, (1, nb)).ravel(), np.tile(fd, (1, nb)).ravel()])
    vals = np.concatenate([vol.ravel(), bnd.ravel()])
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def assemble_matrix(space: DofMap, config: NitscheConfig, degree: int | None = None) -> sp.csr_matrix:
    k = space.degree
    K = local_volume_matrices(space, degree)
    M, D = local_boundary_matrices(space, degree)
    h = space.mesh.boundary_faces.diameter
    c0 = config.penalty(k)
    bnd = -D + config.beta * np.swapaxes(D, 1, 2)
    if c0 != 0.0:
        bnd = bnd + (c0 * h ** (-config.alpha))[:, None, None] * M
    return _scatter(space, K, bnd)


def assemble_rhs(space: DofMap, config: NitscheConfig, f, g, degree: int | None = None) -> np.ndarray:
    """Load vector; ``f`` and ``g`` may return ``(N,)`` or ``(N, m)`` for ``m`` right-hand sides."""
    geo = _Geometry(space)
    degree = 2 * space.degree if degree is None else degree
    c0 = config.penalty(space.degree)
    cd = space.cell_to_dofs

    phi, _, x, wdet = geo.volume(degree, with_grad=False)
    fx = _eval(f, x)
    multi = fx.ndim == 3
    fx = fx if multi else fx[..., None]
    local = np.einsum("cq,qa,cqm->cam", wdet, phi, fx)

    faces = geo.faces
    fd = cd[faces.cell]
    flocal = np.zeros((len(faces), cd.shape[1], local.shape[2]))
    hpen = c0 * faces.diameter ** (-config.alpha)
    for ids, fphi, _, grad_n, fxq, w in geo.face_groups(degree):
        gx = _eval(g, fxq)
        gx = gx if gx.ndim == 3 else gx[..., None]
        test = config.beta * grad_n + hpen[ids][:, None, None] * fphi[None, :, :]
        flocal[ids] = np.einsum("fq,fqa,fqm->fam", w, test, gx)

    n, m = space.num_dofs, local.shape[2]
    rhs = np.zeros((n, m))
    # fixed scatter order: cells ascending, then boundary faces ascending
    for j in range(m):
        rhs[:, j] = np.bincount(cd.ravel(), local[:, :, j].ravel(), minlength=n)
        rhs[:, j] += np.bincount(fd.ravel(), flocal[:, :, j].ravel(), minlength=n)
    return rhs if multi else rhs[:, 0]


def assemble_system(space: DofMap, config: NitscheConfig, f, g, degree: int | None = None) -> LinearSystem:
    """Matrix ``A[i, j] = a(phi_j, phi_i)`` and load vector for data ``f``, ``g``.

    ``degree`` overrides the quadrature degree (default ``2k``, exact for the
    bilinear form on affine cells).
    """
    return LinearSystem(assemble_matrix(space, config, degree), assemble_rhs(space, config, f, g, degree))


def apply_form(space: DofMap, config: NitscheConfig, u_coeffs, v_coeffs, degree: int | None = None) -> float:
    """Evaluate ``a(u_h, v_h)`` directly from the finite element fields.

    No element matrices are formed, so this is an independent check of
    :func:`assemble_matrix`.
    """
    u = np.asarray(u_coeffs, dtype=float)
    v = np.asarray(v_coeffs, dtype=float)
    if u.shape != (space.num_dofs,) or v.shape != (space.num_dofs,):
        raise ValueError(f"coefficient vectors must have length {space.num_dofs}")
    geo = _Geometry(space)
    degree = 2 * space.degree if degree is None else degree
    cd = space.cell_to_dofs
    _, grad, _, wdet = geo.volume(degree)
    gu = np.einsum("cqbi,cb->cqi", grad, u[cd])
    gv = np.einsum("cqbi,cb->cqi", grad, v[cd])
    total = np.einsum("cq,cqi,cqi->", wdet, gu, gv)

    faces = geo.faces
    c0 = config.penalty(space.degree)
    hpen = c0 * faces.diameter ** (-config.alpha)
    for ids, phi, _, grad_n, _, w in geo.face_groups(degree):
        fd = cd[faces.cell[ids]]
        uq, vq = u[fd] @ phi.T, v[fd] @ phi.T
        dun = np.einsum("fqb,fb->fq", grad_n, u[fd])
        dvn = np.einsum("fqb,fb->fq", grad_n, v[fd])
        integrand = -dun * vq + config.beta * uq * dvn + hpen[ids][:, None] * uq * vq
        total += float(np.sum(w * integrand))
    return float(total)


@dataclass
class StructureReport:
    symmetry_defect: float
    interior_defect: float
    boundary_coupled: bool

    @property
    def symmetric(self) -> bool:
        return self.symmetry_defect < 1e-12


def structure_check(A: sp.spmatrix, config: NitscheConfig, boundary_dofs=None) -> StructureReport:
    """Measure ``max |A - A^T|``, overall and with boundary rows/columns masked.

    ``boundary_coupled`` is true when every asymmetric entry lies in a row or
    column of a DOF in ``boundary_dofs`` (trivially true when none is given).
    """
    A = sp.csr_matrix(A)
    S = (A - A.T).tocoo()
    defect = float(np.abs(S.data).max()) if S.nnz else 0.0
    interior = 0.0
    coupled = True
    if boundary_dofs is not None:
        touch = np.zeros(A.shape[0], dtype=bool)
        touch[np.asarray(boundary_dofs)] = True
        mask = ~(touch[S.row] | touch[S.col])
        vals = np.abs(S.data[mask])
        interior = float(vals.max()) if vals.size else 0.0
        coupled = interior < 1e-12
    if config.beta == -1 and defect >= 1e-12:
        coupled = False
    return StructureReport(defect, interior, coupled)


def write_matrix_market(path, A: sp.spmatrix, comment: str = "") -> None:
    """Dump ``A`` in MatrixMarket coordinate format."""
    scipy.io.mmwrite(path, sp.coo_matrix(A), comment=comment, field="real", symmetry="general")
