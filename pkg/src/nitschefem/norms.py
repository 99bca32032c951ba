"""Error norms of finite element fields against exact solutions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .assembly import _Geometry, _eval
from .element import volume_quadrature
from .space import DofMap

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ExactSolution:
    """A manufactured solution: value, gradient and Laplacian callbacks.

    All callbacks take points of shape ``(N, d)``; ``gradient`` returns
    ``(N, d)``.
    """

    value: Field
    gradient: Field
    laplacian: Field
    name: str = "custom"

    def rhs(self, x):
        """Source term ``f = -lap u``."""
        return -np.asarray(self.laplacian(x))

    def check(self, dim: int, npts: int = 50, seed: int = 0, step: float = 1e-6):
        """Largest finite-difference discrepancies ``(gradient, laplacian)``.

        The Laplacian is checked with a second difference of step ``1e-3``:
        with ``1e-6`` cancellation swamps the second derivative.
        """
        rng = np.random.default_rng(seed)
        x = rng.uniform(0.05, 0.95, size=(npts, dim))
        g = np.asarray(self.gradient(x))
        lap = np.asarray(self.laplacian(x))
        fd_grad = np.empty_like(g)
        fd_lap = np.zeros(npts)
        u0 = np.asarray(self.value(x))
        h2 = 1e-3
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = step
            fd_grad[:, j] = (self.value(x + e) - self.value(x - e)) / (2 * step)
            e[j] = h2
            fd_lap += (self.value(x + e) - 2 * u0 + self.value(x - e)) / h2**2
        return float(np.abs(fd_grad - g).max()), float(np.abs(fd_lap - lap).max())


def _degree(space: DofMap, degree: int | None) -> int:
    return 2 * space.degree + 2 if degree is None else degree


def _zero(x):
    return np.zeros(len(x))


def _zero_grad(x):
    return np.zeros_like(x)


def l2_error(space: DofMap, coeffs, exact: ExactSolution | None = None, degree: int | None = None) -> float:
    """``||u - u_h||_0``; with ``exact=None`` this is ``||u_h||_0``."""
    geo = _Geometry(space)
    phi, _, x, wdet = geo.volume(_degree(space, degree), with_grad=False)
    uh = np.asarray(coeffs)[space.cell_to_dofs] @ phi.T
    u = _eval(exact.value if exact else _zero, x)
    return float(np.sqrt(np.sum(wdet * (u - uh) ** 2)))


def h1_semi_error(space: DofMap, coeffs, exact: ExactSolution | None = None, degree: int | None = None) -> float:
    """``||grad(u - u_h)||_0``."""
    geo = _Geometry(space)
    deg = _degree(space, degree)
    _, _, x, wdet = geo.volume(deg, with_grad=False)
    ref = space.element.tabulate_grad(volume_quadrature(space.mesh.dim, deg).points)
    # contract with the coefficients before mapping to physical gradients
    nq, nb, d = ref.shape
    gref = (np.asarray(coeffs)[space.cell_to_dofs] @ ref.transpose(1, 0, 2).reshape(nb, nq * d)).reshape(-1, nq, d)
    guh = gref @ np.swapaxes(geo.invT, 1, 2)
    gu = _eval(exact.gradient if exact else _zero_grad, x)
    return float(np.sqrt(np.sum(wdet[:, :, None] * (gu - guh) ** 2)))


def boundary_weighted_error(
    space: DofMap,
    coeffs,
    exact: ExactSolution | None = None,
    alpha: float = 1.0,
    degree: int | None = None,
) -> float:
    """``||h^(-alpha/2) (u - u_h)||_{0,boundary}`` with ``h`` the facet diameter."""
    geo = _Geometry(space)
    cd = space.cell_to_dofs
    faces = geo.faces
    weight = faces.diameter ** (-alpha)
    c = np.asarray(coeffs)
    total = 0.0
    for ids, phi, _, _, x, w in geo.face_groups(_degree(space, degree)):
        uh = c[cd[faces.cell[ids]]] @ phi.T
        u = _eval(exact.value if exact else _zero, x)
        total += float(np.sum(weight[ids][:, None] * w * (u - uh) ** 2))
    return float(np.sqrt(total))


def boundary_l2_error(space: DofMap, coeffs, exact: ExactSolution | None = None, degree: int | None = None) -> float:
    """Unweighted ``||u - u_h||_{0,boundary}``."""
    return boundary_weighted_error(space, coeffs, exact, alpha=0.0, degree=degree)


def boundary_grad_error(space: DofMap, coeffs, exact: ExactSolution, degree: int | None = None) -> float:
    """``||grad(u - u_h)||_{0,boundary}`` using the one-sided cell gradient."""
    geo = _Geometry(space)
    cells = geo.faces.cell
    c = np.asarray(coeffs)
    total = 0.0
    for ids, _, grad, _, x, w in geo.face_groups(_degree(space, degree)):
        guh = np.einsum("fqbi,fb->fqi", grad, c[space.cell_to_dofs[cells[ids]]])
        gu = _eval(exact.gradient, x)
        total += float(np.sum(w[:, :, None] * (gu - guh) ** 2))
    return float(np.sqrt(total))


@dataclass
class ErrorReport:
    l2_abs: float
    l2_rel: float
    h1_abs: float
    h1_rel: float
    bnd_abs: float
    residual: float = 0.0


def error_report(space: DofMap, coeffs, exact: ExactSolution, residual: float = 0.0, degree: int | None = None) -> ErrorReport:
    """All error quantities; exact norms use the same quadrature as the errors."""
    zero = np.zeros(space.num_dofs)
    l2 = l2_error(space, coeffs, exact, degree)
    h1 = h1_semi_error(space, coeffs, exact, degree)
    l2u = l2_error(space, zero, exact, degree)
    h1u = h1_semi_error(space, zero, exact, degree)
    bnd = boundary_weighted_error(space, coeffs, exact, 1.0, degree)
    return ErrorReport(l2, l2 / l2u if l2u else l2, h1, h1 / h1u if h1u else h1, bnd, residual)
