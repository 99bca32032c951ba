"""Independent oracles for the assembly and the rate extraction.

These recompute element blocks cell by cell through :class:`AffineMap` with a
high-degree quadrature rule, so they share no vectorised code with
:mod:`nitschefem.assembly`.  The driver never calls them; the test suite does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import local_boundary_matrices, local_volume_matrices
from .element import AffineMap, face_points_in_cell, face_quadrature, reference_measure, volume_quadrature
from .mesh import build_mesh, mesh_from_cells
from .space import DofMap, build_space


@dataclass
class OracleResult:
    name: str
    max_abs_discrepancy: float
    budget: float

    @property
    def passed(self) -> bool:
        return self.max_abs_discrepancy <= self.budget

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: discrepancy {self.max_abs_discrepancy:.3e} (budget {self.budget:.1e})"


def _cell_blocks(space: DofMap, cell: int, local_face: int | None, degree: int):
    """Stiffness block of ``cell`` and, if requested, mass/flux blocks of one facet."""
    mesh = space.mesh
    elem = space.element
    amap = AffineMap.from_vertices(mesh.vertices[mesh.cells[cell]])
    q = volume_quadrature(mesh.dim, degree)
    nb = elem.num_nodes
    K = np.zeros((nb, nb))
    for xi, w in zip(q.points, q.weights):
        g = elem.tabulate_grad(xi[None])[0] @ amap.inv_transpose.T
        K += w * amap.det * g @ g.T
    if local_face is None:
        return K, None, None
    fq = face_quadrature(mesh.dim, degree)
    fv = mesh.vertices[np.delete(mesh.cells[cell], local_face)]
    if mesh.dim == 2:
        area = np.linalg.norm(fv[1] - fv[0])
        t = fv[1] - fv[0]
        n = np.array([t[1], -t[0]]) / area
    else:
        c = np.cross(fv[1] - fv[0], fv[2] - fv[0])
        area = 0.5 * np.linalg.norm(c)
        n = c / np.linalg.norm(c)
    if n @ (fv[0] - mesh.vertices[mesh.cells[cell, local_face]]) < 0:
        n = -n
    scale = area / reference_measure(mesh.dim - 1)
    M = np.zeros((nb, nb))
    D = np.zeros((nb, nb))
    for s, w in zip(fq.points, fq.weights):
        xi = face_points_in_cell(mesh.dim, local_face, s[None])
        phi = elem.tabulate(xi)[0]
        gn = (elem.tabulate_grad(xi)[0] @ amap.inv_transpose.T) @ n
        M += w * scale * np.outer(phi, phi)
        D += w * scale * np.outer(phi, gn)
    return K, M, D


def oracle_local_matrices(k: int, dim: int, level: int = 1) -> OracleResult:
    """Compare assembled element/facet blocks of every boundary cell against the oracle.

    The oracle uses quadrature degree ``2k + 6``; the budget is ``1e-12``
    relative to the largest block entry.
    """
    space = build_space(build_mesh(dim, level), k)
    K = local_volume_matrices(space)
    M, D = local_boundary_matrices(space)
    faces = space.mesh.boundary_faces
    worst, scale = 0.0, 0.0
    for f in range(len(faces)):
        c = int(faces.cell[f])
        Ko, Mo, Do = _cell_blocks(space, c, int(faces.local_face[f]), 2 * k + 6)
        worst = max(worst, np.abs(K[c] - Ko).max(), np.abs(M[f] - Mo).max(), np.abs(D[f] - Do).max())
        scale = max(scale, np.abs(Ko).max(), np.abs(Mo).max(), np.abs(Do).max())
    return OracleResult(f"local matrices k={k} dim={dim}", worst / scale, 1e-12)


def oracle_reference_stiffness() -> OracleResult:
    """P1 stiffness of the reference triangle against ``0.5 [[2,-1,-1],[-1,1,0],[-1,0,1]]``."""
    mesh = mesh_from_cells(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]))
    space = build_space(mesh, 1)
    K = local_volume_matrices(space)[0]
    exact = 0.5 * np.array([[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
    return OracleResult("reference P1 stiffness", float(np.abs(K - exact).max()), 1e-14)


def oracle_penalty_block(k: int, dim: int) -> OracleResult:
    """Facet mass blocks must be symmetric and positive semidefinite."""
    space = build_space(build_mesh(dim, 1), k)
    M, _ = local_boundary_matrices(space)
    asym = np.abs(M - np.swapaxes(M, 1, 2)).max()
    min_eig = min(np.linalg.eigvalsh(0.5 * (m + m.T)).min() for m in M)
    scale = np.abs(M).max()
    return OracleResult(f"penalty block k={k} dim={dim}", max(asym, -min(min_eig, 0.0)) / scale, 1e-13)


def oracle_consistency_rowsums(dim: int) -> OracleResult:
    """With test function 1, the flux block reduces to ``-|F| grad(phi_j) . n`` for P1."""
    space = build_space(build_mesh(dim, 1), 1)
    _, D = local_boundary_matrices(space)
    mesh = space.mesh
    faces = mesh.boundary_faces
    worst = 0.0
    for f in range(len(faces)):
        c = int(faces.cell[f])
        amap = AffineMap.from_vertices(mesh.vertices[mesh.cells[c]])
        g = space.element.tabulate_grad(np.full((1, dim), 1.0 / (dim + 1)))[0] @ amap.inv_transpose.T
        expected = -faces.area[f] * (g @ faces.normal[f])
        worst = max(worst, np.abs((-D[f]).sum(axis=0) - expected).max())
    return OracleResult(f"flux row sums dim={dim}", worst, 1e-13)


def oracle_rate_fit(errors, h_list) -> float:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    e = np.asarray(errors, dtype=float)
    h = np.asarray(h_list, dtype=float)
    if len(e) < 3 or len(e) != len(h):
        raise ValueError("need at least three (h, error) pairs of equal length")
    if (e <= 0).any() or (h <= 0).any() or np.ptp(np.log(h)) == 0:
        raise ValueError("degenerate rate fit")
    slope, _ = np.polyfit(np.log(h), np.log(e), 1)
    return float(slope)


def rate_fit_check(errors, h_list, budget: float = 0.2) -> OracleResult:
    """Fitted slope against the last pairwise rate."""
    slope = oracle_rate_fit(errors, h_list)
    last = math.log(errors[-2] / errors[-1]) / math.log(h_list[-2] / h_list[-1])
    return OracleResult("rate fit vs last pairwise rate", abs(slope - last), budget)
