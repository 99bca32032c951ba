"""Linear solvers for the assembled systems.

The direct path wraps SuperLU.  The iterative path is a restarted GMRES with
right Jacobi preconditioning (so the minimised residual is the true one), and
a Jacobi-preconditioned conjugate gradient for symmetric positive definite
matrices.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import LinearSystem


class SingularMatrixError(RuntimeError):
    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


class ConvergenceError(RuntimeError):
    """Raised when an iterative solve stops above tolerance; carries the last iterate."""

    def __init__(self, message: str, x: np.ndarray, stats: "SolveStats"):
        super().__init__(message)
        self.x = x
        self.stats = stats


@dataclass
class SolveStats:
    method: str
    iterations: int
    residual: float
    elapsed: float


def relative_residual(A, x, b) -> float:
    """``||b - A x|| / ||b||`` (max over columns); the plain norm when ``b = 0``."""
    r = b - A @ x
    rn = np.linalg.norm(r, axis=0)
    bn = np.linalg.norm(b, axis=0)
    rel = np.where(bn > 0, rn / np.where(bn > 0, bn, 1.0), rn)
    return float(np.max(rel))


#: largest matrix for which a failed sparse LU is redone densely to locate the pivot
DENSE_PIVOT_LIMIT = 4000


def _dense_zero_pivot(A) -> int | None:
    """First column whose pivot vanishes in a dense partial-pivoting LU (small matrices only)."""
    if A.shape[0] > DENSE_PIVOT_LIMIT:
        return None
    _, _, U = scipy.linalg.lu(A.toarray())
    d = np.abs(np.diag(U))
    tiny = np.flatnonzero(d <= DirectSolver.PIVOT_TOL * max(d.max(), 1.0))
    return int(tiny[0]) if tiny.size else None


class DirectSolver:
    """Reusable sparse LU factorisation."""

    PIVOT_TOL = 1e-14

    def __init__(self, A):
        A = sp.csc_matrix(A)
        try:
            self.lu = spla.splu(A)
        except RuntimeError as exc:
            pivot = _dense_zero_pivot(A)
            where = f" (zero pivot at column {pivot})" if pivot is not None else ""
            raise SingularMatrixError(f"LU factorisation failed: {exc}{where}", pivot=pivot) from exc
        d = np.abs(self.lu.U.diagonal())
        tiny = np.flatnonzero(d <= self.PIVOT_TOL * max(d.max(), 1.0))
        if tiny.size:
            col = int(self.lu.perm_c[tiny[0]])
            raise SingularMatrixError(f"zero pivot at column {col}", pivot=col)
        self.A = A

    def solve(self, b) -> np.ndarray:
        return self.lu.solve(np.asarray(b, dtype=float))


def solve_direct(system: LinearSystem):
    """Solve by sparse LU; ``rhs`` may hold several columns."""
    t0 = time.perf_counter()
    b = np.asarray(system.rhs, dtype=float)
    if not np.any(b):
        x = np.zeros_like(b)
    else:
        x = DirectSolver(system.matrix).solve(b)
    res = relative_residual(system.matrix, x, b)
    return x, SolveStats("direct", 1, res, time.perf_counter() - t0)


def _gmres(A, b, dinv, tol, max_iter, restart):
    n = len(b)
    x = np.zeros(n)
    bnorm = np.linalg.norm(b)
    it = 0
    r = b.copy()
    beta = np.linalg.norm(r)
    while beta > tol * bnorm and it < max_iter:
        m = min(restart, max_iter - it)
        V = np.zeros((m + 1, n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        V[0] = r / beta
        j_used = 0
        for j in range(m):
            w = A @ (dinv * V[j])
            for i in range(j + 1):  # modified Gram-Schmidt
                H[i, j] = w @ V[i]
                w -= H[i, j] * V[i]
            H[j + 1, j] = np.linalg.norm(w)
            if H[j + 1, j] > 0:
                V[j + 1] = w / H[j + 1, j]
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            denom = np.hypot(H[j, j], H[j + 1, j])
            cs[j], sn[j] = H[j, j] / denom, H[j + 1, j] / denom
            H[j, j] = denom
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            it += 1
            j_used = j + 1
            if abs(g[j + 1]) <= tol * bnorm or H[j, j] == 0:
                break
        y = np.linalg.solve(np.triu(H[:j_used, :j_used]), g[:j_used])
        x += dinv * (V[:j_used].T @ y)
        r = b - A @ x
        beta = np.linalg.norm(r)
    return x, it


def _cg(A, b, dinv, tol, max_iter):
    x = np.zeros_like(b)
    r = b.copy()
    z = dinv * r
    p = z.copy()
    rz = r @ z
    bnorm = np.linalg.norm(b)
    it = 0
    while np.linalg.norm(r) > tol * bnorm and it < max_iter:
        Ap = A @ p
        a = rz / (p @ Ap)
        x += a * p
        r -= a * Ap
        z = dinv * r
        rz, rz_old = r @ z, rz
        p = z + (rz / rz_old) * p
        it += 1
    return x, it


def solve_krylov(system: LinearSystem, tol: float = 1e-10, max_iter: int = 10000, restart: int = 50, method: str = "gmres"):
    """Jacobi-preconditioned iterative solve.

    ``method="gmres"`` works for any nonsingular matrix; ``method="cg"``
    requires a symmetric positive definite one.

    Raises
    ------
    ConvergenceError
        If the relative residual is still above ``tol`` after ``max_iter``
        iterations.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if method not in ("gmres", "cg"):
        raise ValueError(f"unknown Krylov method {method!r}")
    t0 = time.perf_counter()
    A = sp.csr_matrix(system.matrix)
    b = np.asarray(system.rhs, dtype=float)
    if b.ndim != 1:
        raise ValueError("solve_krylov takes a single right-hand side")
    if not np.any(b):
        return np.zeros_like(b), SolveStats(method, 0, 0.0, time.perf_counter() - t0)
    diag = A.diagonal()
    dinv = np.where(diag != 0, 1.0 / np.where(diag != 0, diag, 1.0), 1.0)
    if method == "gmres":
        x, it = _gmres(A, b, dinv, tol, max_iter, restart)
    else:
        x, it = _cg(A, b, dinv, tol, max_iter)
    stats = SolveStats(method, it, relative_residual(A, x, b), time.perf_counter() - t0)
    if stats.residual > tol:
        raise ConvergenceError(f"{method} stopped at residual {stats.residual:.3e} after {it} iterations", x, stats)
    return x, stats


def solve(system: LinearSystem, method: str = "direct", tol: float = 1e-12, **kwargs):
    if method == "direct":
        return solve_direct(system)
    if method in ("krylov", "gmres"):
        return solve_krylov(system, tol=tol, **kwargs)
    if method == "cg":
        return solve_krylov(system, tol=tol, method="cg", **kwargs)
    raise ValueError(f"unknown solver {method!r}")
