"""Structured simplicial meshes of the unit square and unit cube.

2D: every grid square is cut along the diagonal from ``(i, j)`` to
``(i+1, j+1)``, so all triangles are right triangles.  3D: every grid cube is
cut into the six Kuhn (Freudenthal) tetrahedra sharing the main diagonal.

Graded meshes are produced by moving the vertices of the uniform mesh with a
map that fixes the unit box and concentrates cells at the origin corner.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .element import affine_maps

#: vertex indices must fit the 32-bit index arrays used by the sparse matrices
MAX_VERTICES = np.iinfo(np.int32).max
#: minimum interior (2D) or dihedral (3D) angle accepted for graded meshes
MIN_ANGLE_FLOOR = math.radians(5.0)
GRADING_MAPS = ("radial", "tensor")


@dataclass(frozen=True)
class BoundaryFaces:
    """Boundary facets stored column-wise.

    ``local_face`` is the index of the cell vertex *opposite* the facet.
    """

    cell: np.ndarray
    local_face: np.ndarray
    normal: np.ndarray
    diameter: np.ndarray
    area: np.ndarray
    vertices: np.ndarray

    def __len__(self):
        return len(self.cell)


@dataclass(frozen=True)
class Mesh:
    dim: int
    vertices: np.ndarray
    cells: np.ndarray
    boundary_faces: BoundaryFaces
    level: int = 0
    grading: float = 1.0

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    def cell_volumes(self) -> np.ndarray:
        _, _, det, _ = affine_maps(self.vertices, self.cells)
        return det / math.factorial(self.dim)

    def cell_diameters(self) -> np.ndarray:
        v = self.vertices[self.cells]
        diam = np.zeros(len(v))
        for a, b in itertools.combinations(range(self.dim + 1), 2):
            diam = np.maximum(diam, np.linalg.norm(v[:, a] - v[:, b], axis=1))
        return diam

    def edges(self) -> np.ndarray:
        """Unique edges as sorted vertex pairs."""
        pairs = [self.cells[:, [a, b]] for a, b in itertools.combinations(range(self.dim + 1), 2)]
        return np.unique(np.sort(np.vstack(pairs), axis=1), axis=0)


def _grid_vertices(dim: int, n: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n + 1)
    t[-1] = 1.0
    grids = np.meshgrid(*([t] * dim), indexing="ij")
    # x fastest: vertex index = i + (n+1) j (+ (n+1)^2 l)
    return np.column_stack([g.transpose().ravel() for g in grids])


def _cells_2d(n: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    p00 = (i + (n + 1) * j).ravel()
    p10 = p00 + 1
    p01 = p00 + (n + 1)
    p11 = p01 + 1
    lower = np.column_stack([p00, p10, p11])
    upper = np.column_stack([p00, p11, p01])
    return np.stack([lower, upper], axis=1).reshape(-1, 3)


def _cells_3d(n: int) -> np.ndarray:
    m = n + 1
    i, j, l = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    base = np.stack([i, j, l], axis=-1).reshape(-1, 3)
    base = base[np.lexsort((base[:, 0], base[:, 1], base[:, 2]))]
    stride = np.array([1, m, m * m])
    tets = []
    for perm in itertools.permutations(range(3)):
        idx = [base @ stride]
        cur = base.copy()
        for axis in perm:
            cur = cur.copy()
            cur[:, axis] += 1
            idx.append(cur @ stride)
        tets.append(np.column_stack(idx))
    return np.stack(tets, axis=1).reshape(-1, 4)


def _grade(vertices: np.ndarray, grading: float, how: str) -> np.ndarray:
    if grading == 1.0:
        return vertices
    if how == "tensor":
        return vertices**grading
    # x -> |x|_inf^(grading-1) x: maps each ray from the origin onto itself,
    # leaves the faces through (1,...,1) fixed and keeps cells shape regular.
    r = vertices.max(axis=1, keepdims=True)
    scale = np.where(r > 0, r ** (grading - 1.0), 0.0)
    out = vertices * scale
    out[vertices == 1.0] = 1.0
    out[vertices == 0.0] = 0.0
    return out


def _orient(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    _, _, det, _ = affine_maps(vertices, cells)
    cells = cells.copy()
    neg = det < 0
    cells[neg, 0], cells[neg, 1] = cells[neg, 1], cells[neg, 0].copy()
    return cells


def _local_faces(dim: int) -> list[list[int]]:
    return [[j for j in range(dim + 1) if j != i] for i in range(dim + 1)]


def _face_table(cells: np.ndarray, dim: int):
    """All (cell, local_face) facets with sorted vertex keys."""
    nc = len(cells)
    faces = np.concatenate([cells[:, f] for f in _local_faces(dim)])
    cell_id = np.tile(np.arange(nc), dim + 1)
    local = np.repeat(np.arange(dim + 1), nc)
    keys = np.sort(faces, axis=1)
    return keys, cell_id, local


def _boundary_faces(vertices: np.ndarray, cells: np.ndarray, dim: int) -> BoundaryFaces:
    keys, cell_id, local = _face_table(cells, dim)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    on_bnd = counts[inverse] == 1
    order = np.lexsort((local[on_bnd], cell_id[on_bnd]))
    bcell = cell_id[on_bnd][order]
    blocal = local[on_bnd][order]
    lf = np.array(_local_faces(dim))
    fverts = cells[bcell[:, None], lf[blocal]]
    normal, area, diam = facet_geometry(vertices, cells, bcell, blocal)
    return BoundaryFaces(bcell, blocal, normal, diam, area, fverts)


def facet_geometry(vertices, cells, cell, local_face):
    """Outward unit normals, measures and diameters of the given cell facets."""
    dim = vertices.shape[1]
    lf = np.array(_local_faces(dim))
    fv = vertices[cells[cell[:, None], lf[local_face]]]
    opp = vertices[cells[cell, local_face]]
    e = fv[:, 1:] - fv[:, :1]
    if dim == 2:
        t = e[:, 0]
        nrm = np.column_stack([t[:, 1], -t[:, 0]])
        area = np.linalg.norm(t, axis=1)
    else:
        nrm = np.cross(e[:, 0], e[:, 1])
        area = 0.5 * np.linalg.norm(nrm, axis=1)
    nrm = nrm / np.linalg.norm(nrm, axis=1, keepdims=True)
    # flip towards the outside: away from the opposite vertex
    sign = np.sign(np.einsum("ij,ij->i", nrm, fv[:, 0] - opp))
    nrm = nrm * sign[:, None]
    diam = np.zeros(len(fv))
    for a, b in itertools.combinations(range(dim), 2):
        diam = np.maximum(diam, np.linalg.norm(fv[:, a] - fv[:, b], axis=1))
    return nrm, area, diam


def build_mesh(dim: int, level: int, grading: float = 1.0, grading_map: str = "radial") -> Mesh:
    """Structured simplicial mesh of ``[0, 1]^dim`` with grid spacing ``2**-level``.

    Parameters
    ----------
    dim : int
        2 or 3.
    level : int
        Refinement level; the grid has ``2**level`` intervals per axis.
    grading : float
        ``1`` gives a uniform mesh; larger values grade towards the origin.
    grading_map : {"radial", "tensor"}
        ``"radial"`` scales each vertex by ``max_i x_i ** (grading - 1)``;
        ``"tensor"`` maps every coordinate ``x -> x**grading``.

    Raises
    ------
    ValueError
        On bad arguments, index overflow, or when the graded mesh has an
        angle below :data:`MIN_ANGLE_FLOOR`.
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    if int(level) != level or level < 0:
        raise ValueError(f"level must be a nonnegative integer, got {level}")
    if not grading >= 1.0:
        raise ValueError(f"grading must be >= 1, got {grading}")
    if grading_map not in GRADING_MAPS:
        raise ValueError(f"unknown grading map {grading_map!r}")
    level = int(level)
    n = 2**level
    if (n + 1) ** dim > MAX_VERTICES:
        raise ValueError(f"level {level} overflows the vertex index type in {dim}D")

    vertices = _grade(_grid_vertices(dim, n), float(grading), grading_map)
    cells = _cells_2d(n) if dim == 2 else _cells_3d(n)
    mesh = mesh_from_cells(vertices, cells, level, float(grading))
    if grading != 1.0:
        amin = _min_angle(mesh)
        if amin < MIN_ANGLE_FLOOR:
            raise ValueError(
                f"grading {grading} at level {level} gives a minimum angle of "
                f"{math.degrees(amin):.2f} deg, below the {math.degrees(MIN_ANGLE_FLOOR):.0f} deg floor"
            )
    return mesh


def mesh_from_cells(vertices, cells, level: int = 0, grading: float = 1.0) -> Mesh:
    """Wrap raw simplices as a :class:`Mesh`, fixing orientation and finding boundary facets."""
    vertices = np.asarray(vertices, dtype=float)
    dim = vertices.shape[1]
    cells = _orient(vertices, np.asarray(cells, dtype=np.int64))
    return Mesh(dim, vertices, cells, _boundary_faces(vertices, cells, dim), level, grading)


def triangle_angles(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    v = vertices[cells]
    out = np.empty((len(cells), 3))
    for i in range(3):
        a = v[:, (i + 1) % 3] - v[:, i]
        b = v[:, (i + 2) % 3] - v[:, i]
        cos = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        out[:, i] = np.arccos(np.clip(cos, -1.0, 1.0))
    return out


def dihedral_angles(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """The six dihedral angles of every tetrahedron, shape ``(ncells, 6)``."""
    nc = len(cells)
    normals = []
    for f in range(4):
        nrm, _, _ = facet_geometry(vertices, cells, np.arange(nc), np.full(nc, f))
        normals.append(nrm)
    out = []
    for a, b in itertools.combinations(range(4), 2):
        cos = np.einsum("ij,ij->i", normals[a], normals[b])
        out.append(np.pi - np.arccos(np.clip(cos, -1.0, 1.0)))
    return np.column_stack(out)


def _angles(mesh: Mesh) -> np.ndarray:
    if mesh.dim == 2:
        return triangle_angles(mesh.vertices, mesh.cells)
    return dihedral_angles(mesh.vertices, mesh.cells)


def _min_angle(mesh: Mesh) -> float:
    return float(_angles(mesh).min())


def mesh_size(mesh: Mesh) -> tuple[float, float]:
    """``(h, h_min)``: largest and smallest cell diameter."""
    d = mesh.cell_diameters()
    return float(d.max()), float(d.min())


@dataclass
class ValidationReport:
    min_angle: float
    max_angle: float
    volume_sum: float
    all_positive: bool
    faces_ok: bool
    normals_ok: bool
    boundary_closure: float
    boundary_vertices_ok: bool
    shape_ratio: float
    max_angle_ok: bool

    @property
    def ok(self) -> bool:
        return (
            self.all_positive
            and self.faces_ok
            and self.normals_ok
            and self.boundary_vertices_ok
            and abs(self.volume_sum - 1.0) <= 1e-12
            and self.boundary_closure <= 1e-12
        )


def validate(mesh: Mesh) -> ValidationReport:
    """Check the structural invariants of ``mesh``; never raises."""
    dim = mesh.dim
    vol = mesh.cell_volumes()
    keys, _, _ = _face_table(mesh.cells, dim)
    _, counts = np.unique(keys, axis=0, return_counts=True)
    bf = mesh.boundary_faces
    faces_ok = bool(counts.max() <= 2 and (counts == 1).sum() == len(bf))

    v = mesh.vertices
    centroid = v[mesh.cells[bf.cell]].mean(axis=1)
    fcentroid = v[bf.vertices].mean(axis=1)
    outward = np.einsum("ij,ij->i", bf.normal, fcentroid - centroid) > 0
    unit = np.abs(np.linalg.norm(bf.normal, axis=1) - 1.0) <= 1e-14
    closure = np.abs((bf.area[:, None] * bf.normal).sum(axis=0)).max()

    bverts = np.unique(bf.vertices)
    on_box = ((v[bverts] == 0.0) | (v[bverts] == 1.0)).any(axis=1)

    # shape regularity: diameter / inradius, inradius = d |T| / sum |F|
    face_area = np.zeros(mesh.num_cells)
    for f in range(dim + 1):
        _, area, _ = facet_geometry(v, mesh.cells, np.arange(mesh.num_cells), np.full(mesh.num_cells, f))
        face_area += area
    rho = dim * vol / face_area
    ang = _angles(mesh)
    return ValidationReport(
        min_angle=float(ang.min()),
        max_angle=float(ang.max()),
        volume_sum=float(vol.sum()),
        all_positive=bool((vol > 0).all()),
        faces_ok=faces_ok,
        normals_ok=bool(outward.all() and unit.all()),
        boundary_closure=float(closure),
        boundary_vertices_ok=bool(on_box.all()),
        shape_ratio=float((mesh.cell_diameters() / rho).max()),
        max_angle_ok=bool(ang.max() <= np.pi / 2 + 1e-12),
    )


_VTK_CELL_TYPE = {2: 5, 3: 10}


def write_vtk(path, mesh: Mesh, point_data: dict | None = None, title: str = "nitschefem mesh") -> None:
    """Write ``mesh`` (and optional per-vertex fields) as legacy ASCII VTK."""
    point_data = point_data or {}
    nv, nc = mesh.num_vertices, mesh.num_cells
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {nv} double\n")
        pts = np.zeros((nv, 3))
        pts[:, : mesh.dim] = mesh.vertices
        np.savetxt(fh, pts, fmt="%.17g")
        fh.write(f"CELLS {nc} {nc * (mesh.dim + 2)}\n")
        np.savetxt(fh, np.column_stack([np.full(nc, mesh.dim + 1), mesh.cells]), fmt="%d")
        fh.write(f"CELL_TYPES {nc}\n")
        np.savetxt(fh, np.full(nc, _VTK_CELL_TYPE[mesh.dim]), fmt="%d")
        if point_data:
            fh.write(f"POINT_DATA {nv}\n")
            for name, values in point_data.items():
                values = np.asarray(values, dtype=float)
                if len(values) != nv:
                    raise ValueError(f"field {name!r} has {len(values)} values, mesh has {nv} vertices")
                fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                np.savetxt(fh, values, fmt="%.17g")
