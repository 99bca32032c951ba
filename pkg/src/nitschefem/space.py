"""Continuous Lagrange spaces: global numbering, boundary DOFs, interpolation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .element import ReferenceElement, reference_element
from .mesh import Mesh

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class DofMap:
    mesh: Mesh
    element: ReferenceElement
    num_dofs: int
    cell_to_dofs: np.ndarray
    boundary_dofs: np.ndarray
    dof_coords: np.ndarray

    @property
    def degree(self) -> int:
        return self.element.degree

    def evaluate(self, coeffs, cells, ref_points) -> np.ndarray:
        """Evaluate the finite element function at reference points of the given cells."""
        phi = self.element.tabulate(ref_points)
        return np.asarray(coeffs)[self.cell_to_dofs[cells]] @ phi.T


def build_space(mesh: Mesh, k: int) -> DofMap:
    """Number the degree-``k`` Lagrange DOFs of ``mesh``.

    Vertex DOFs keep the vertex numbering.  Every other node is identified by
    the set of cell vertices it is a barycentric combination of, together with
    the weights, so neighbouring cells agree on it without comparing floats.
    """
    elem = reference_element(mesh.dim, k)
    cells = mesh.cells
    nc, nv = mesh.num_cells, mesh.num_vertices
    mis = np.array(elem.multi_indices)  # (nnodes, d+1)
    nvert_local = mesh.dim + 1
    cell_to_dofs = np.empty((nc, len(mis)), dtype=np.int64)
    cell_to_dofs[:, :nvert_local] = cells

    extra = mis[nvert_local:]
    if len(extra):
        # key entries: vertex * (k+1) + weight for nonzero weights, sorted, padded with -1
        ne = len(extra)
        vid = np.broadcast_to(cells[:, None, :], (nc, ne, nvert_local))
        w = np.broadcast_to(extra[None, :, :], (nc, ne, nvert_local))
        keys = np.where(w > 0, vid * (k + 1) + w, -1)
        keys = np.sort(keys, axis=2).reshape(nc * ne, nvert_local)
        _, inverse = np.unique(keys, axis=0, return_inverse=True)
        cell_to_dofs[:, nvert_local:] = nv + inverse.reshape(nc, ne)
        num_dofs = nv + int(inverse.max()) + 1
    else:
        num_dofs = nv

    bary = mis / k
    local_coords = np.einsum("nv,cvd->cnd", bary, mesh.vertices[cells])
    dof_coords = np.empty((num_dofs, mesh.dim))
    dof_coords[cell_to_dofs.ravel()] = local_coords.reshape(-1, mesh.dim)
    dof_coords[:nv] = mesh.vertices

    on_bnd = ((np.abs(dof_coords) <= BOUNDARY_TOL) | (np.abs(dof_coords - 1.0) <= BOUNDARY_TOL)).any(axis=1)
    return DofMap(mesh, elem, num_dofs, cell_to_dofs, np.flatnonzero(on_bnd), dof_coords)


def nodal_interpolant(space: DofMap, u) -> np.ndarray:
    """Coefficients of the Lagrange interpolant of the vectorised callback ``u``."""
    return np.asarray(u(space.dof_coords), dtype=float).reshape(space.num_dofs)
