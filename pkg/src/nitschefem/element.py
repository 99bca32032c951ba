"""Lagrange elements on the reference simplex, quadrature rules and affine maps.

The reference simplex has vertices ``0, e_1, ..., e_d``. Local nodes are the
equispaced barycentric lattice of order ``k``; vertices come first (in vertex
order), followed by the remaining lattice points in lexicographic order of
their barycentric multi-index.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_DEGREE = 3
MAX_QUAD_DEGREE = 20
_OUTSIDE_TOL = 1e-12


def reference_vertices(dim: int) -> np.ndarray:
    return np.vstack([np.zeros(dim), np.eye(dim)])


def reference_measure(dim: int) -> float:
    """Measure of the reference ``dim``-simplex (1 for the unit interval)."""
    return 1.0 / math.factorial(dim)


def _multi_indices(dim: int, k: int) -> list[tuple[int, ...]]:
    """Barycentric multi-indices (length dim+1, summing to k), vertices first."""
    allm = [m for m in itertools.product(range(k + 1), repeat=dim + 1) if sum(m) == k]
    vertices = [tuple(k if j == i else 0 for j in range(dim + 1)) for i in range(dim + 1)]
    rest = sorted(m for m in allm if m not in vertices)
    return vertices + rest


def _monomial_exponents(dim: int, k: int) -> np.ndarray:
    exps = [e for e in itertools.product(range(k + 1), repeat=dim) if sum(e) <= k]
    return np.array(sorted(exps, key=lambda e: (sum(e), tuple(-x for x in e))), dtype=int)


def _monomials(points: np.ndarray, exps: np.ndarray) -> np.ndarray:
    # (npts, nmono)
    return np.prod(points[:, None, :] ** exps[None, :, :], axis=2)


def _monomial_grads(points: np.ndarray, exps: np.ndarray) -> np.ndarray:
    # (npts, nmono, dim)
    npts, dim = points.shape
    out = np.empty((npts, len(exps), dim))
    for j in range(dim):
        e = exps.copy()
        coef = e[:, j].astype(float)
        e[:, j] = np.maximum(e[:, j] - 1, 0)
        out[:, :, j] = coef[None, :] * _monomials(points, e)
    return out


@dataclass(frozen=True)
class ReferenceElement:
    """Continuous Lagrange element of degree ``degree`` on the reference simplex."""

    dim: int
    degree: int
    multi_indices: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    nodes: np.ndarray = field(init=False, repr=False)
    _exps: np.ndarray = field(init=False, repr=False)
    _coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if not 1 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in 1..{MAX_DEGREE}, got {self.degree}")
        mis = tuple(_multi_indices(self.dim, self.degree))
        bary = np.array(mis, dtype=float) / self.degree
        nodes = bary[:, 1:]
        exps = _monomial_exponents(self.dim, self.degree)
        vander = _monomials(nodes, exps)
        # columns of coeffs are the basis functions in monomial form
        coeffs = np.linalg.solve(vander, np.eye(len(mis)))
        object.__setattr__(self, "multi_indices", mis)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "_exps", exps)
        object.__setattr__(self, "_coeffs", coeffs)

    @property
    def num_nodes(self) -> int:
        return len(self.multi_indices)

    def tabulate(self, points) -> np.ndarray:
        """Basis values at ``points`` (shape ``(npts, dim)``) -> ``(npts, nbasis)``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return _monomials(pts, self._exps) @ self._coeffs

    def tabulate_grad(self, points) -> np.ndarray:
        """Reference gradients at ``points`` -> ``(npts, nbasis, dim)``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.einsum("pmj,mb->pbj", _monomial_grads(pts, self._exps), self._coeffs)


@lru_cache(maxsize=None)
def reference_element(dim: int, degree: int) -> ReferenceElement:
    return ReferenceElement(dim, degree)


def _check_inside(dim: int, point) -> np.ndarray:
    p = np.asarray(point, dtype=float).reshape(dim)
    bary = np.concatenate([[1.0 - p.sum()], p])
    if bary.min() < -_OUTSIDE_TOL:
        raise ValueError(f"point {p.tolist()} lies outside the reference simplex")
    return p


def eval_basis(elem: ReferenceElement, point) -> np.ndarray:
    """Values of all basis functions at a single reference point."""
    return elem.tabulate(_check_inside(elem.dim, point)[None, :])[0]


def eval_basis_grad(elem: ReferenceElement, point) -> np.ndarray:
    """Reference gradients of all basis functions at one point, shape ``(nbasis, dim)``."""
    return elem.tabulate_grad(_check_inside(elem.dim, point)[None, :])[0]


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def __len__(self):
        return len(self.weights)


def _gauss01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def _simplex_rule(dim: int, degree: int) -> QuadratureRule:
    if not 0 <= degree <= MAX_QUAD_DEGREE:
        raise ValueError(f"quadrature degree must be in 0..{MAX_QUAD_DEGREE}, got {degree}")
    if dim == 1:
        x, w = _gauss01(max(1, math.ceil((degree + 1) / 2)))
        return QuadratureRule(x[:, None], w, degree)
    # Collapsed (Duffy) map: the Jacobian adds dim-1 to the polynomial degree
    # along the first collapsed direction.
    n = max(1, math.ceil((degree + dim) / 2))
    x, w = _gauss01(n)
    if dim == 2:
        u, v = np.meshgrid(x, x, indexing="ij")
        wu, wv = np.meshgrid(w, w, indexing="ij")
        pts = np.column_stack([u.ravel(), (v * (1 - u)).ravel()])
        wts = (wu * wv * (1 - u)).ravel()
    elif dim == 3:
        u, v, t = np.meshgrid(x, x, x, indexing="ij")
        wu, wv, wt = np.meshgrid(w, w, w, indexing="ij")
        pts = np.column_stack(
            [u.ravel(), (v * (1 - u)).ravel(), (t * (1 - u) * (1 - v)).ravel()]
        )
        wts = (wu * wv * wt * (1 - u) ** 2 * (1 - v)).ravel()
    else:
        raise ValueError(f"unsupported simplex dimension {dim}")
    return QuadratureRule(pts, wts, degree)


def volume_quadrature(dim: int, degree: int) -> QuadratureRule:
    """Positive-weight rule on the reference ``dim``-simplex, exact to ``degree``."""
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    return _simplex_rule(dim, degree)


def face_quadrature(dim: int, degree: int) -> QuadratureRule:
    """Rule on the reference facet of a ``dim``-simplex (unit interval or triangle)."""
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    return _simplex_rule(dim - 1, degree)


def face_vertices(dim: int, local_face: int) -> np.ndarray:
    """Reference-cell coordinates of the vertices of the face opposite ``local_face``."""
    rv = reference_vertices(dim)
    return np.delete(rv, local_face, axis=0)


def face_points_in_cell(dim: int, local_face: int, face_points: np.ndarray) -> np.ndarray:
    """Embed reference-facet points into the reference cell on face ``local_face``."""
    fv = face_vertices(dim, local_face)
    return fv[0] + face_points @ (fv[1:] - fv[0])


@dataclass(frozen=True)
class AffineMap:
    """x = B @ xi + b from the reference simplex onto one cell."""

    matrix: np.ndarray
    offset: np.ndarray
    det: float
    inv_transpose: np.ndarray

    @classmethod
    def from_vertices(cls, vertices) -> "AffineMap":
        v = np.asarray(vertices, dtype=float)
        B = (v[1:] - v[0]).T
        det = float(np.linalg.det(B))
        if det <= 0:
            raise ValueError("cell vertices are not positively oriented")
        return cls(B, v[0].copy(), det, np.linalg.inv(B).T)

    def forward(self, xi) -> np.ndarray:
        return np.asarray(xi) @ self.matrix.T + self.offset

    def inverse(self, x) -> np.ndarray:
        return (np.asarray(x) - self.offset) @ self.inv_transpose


def affine_maps(vertices: np.ndarray, cells: np.ndarray):
    """Vectorised affine data for all cells: ``(B, b, det, B^{-T})``."""
    v = vertices[cells]
    B = np.swapaxes(v[:, 1:] - v[:, :1], 1, 2)
    det = np.linalg.det(B)
    invT = np.swapaxes(np.linalg.inv(B), 1, 2)
    return B, v[:, 0], det, invT
