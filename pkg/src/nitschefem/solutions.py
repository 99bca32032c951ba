"""Manufactured solutions used by the convergence studies."""
from __future__ import annotations

import numpy as np

from .norms import ExactSolution

PI = np.pi


def sine2d() -> ExactSolution:
    """``sin(pi x) sin(pi y)``; vanishes on the boundary."""

    def value(x):
        return np.sin(PI * x[:, 0]) * np.sin(PI * x[:, 1])

    def gradient(x):
        sx, sy = np.sin(PI * x[:, 0]), np.sin(PI * x[:, 1])
        cx, cy = np.cos(PI * x[:, 0]), np.cos(PI * x[:, 1])
        return PI * np.column_stack([cx * sy, sx * cy])

    def laplacian(x):
        return -2 * PI**2 * value(x)

    return ExactSolution(value, gradient, laplacian, "sine2d")


def trig2d() -> ExactSolution:
    """``sin(pi (x + y))``: nonzero Dirichlet data and normal flux on every side."""

    def value(x):
        return np.sin(PI * (x[:, 0] + x[:, 1]))

    def gradient(x):
        c = PI * np.cos(PI * (x[:, 0] + x[:, 1]))
        return np.column_stack([c, c])

    def laplacian(x):
        return -2 * PI**2 * value(x)

    return ExactSolution(value, gradient, laplacian, "trig2d")


def _sine_pair(a: int, b: int) -> ExactSolution:
    def value(x):
        return np.sin(PI * x[:, a]) * np.sin(PI * x[:, b])

    def gradient(x):
        g = np.zeros_like(x)
        g[:, a] = PI * np.cos(PI * x[:, a]) * np.sin(PI * x[:, b])
        g[:, b] = PI * np.sin(PI * x[:, a]) * np.cos(PI * x[:, b])
        return g

    def laplacian(x):
        return -2 * PI**2 * value(x)

    return ExactSolution(value, gradient, laplacian, f"sin{a}{b}")


def sine3d_vector() -> tuple[ExactSolution, ExactSolution, ExactSolution]:
    """The 3D vector test field ``(sin(pi y) sin(pi z), sin(pi z) sin(pi x), sin(pi x) sin(pi y))``."""
    return (_sine_pair(1, 2), _sine_pair(2, 0), _sine_pair(0, 1))


_POLY_DIRS = {
    2: ((0.3, 1.0, 0.7), (0.2, -0.5, 0.9)),
    3: ((0.3, 1.0, 0.7, 0.5), (0.2, -0.5, 0.9, -0.4)),
}


def polynomial(dim: int, k: int) -> ExactSolution:
    """The global degree-``k`` polynomial ``(a0 + a.x)**k + (b0 + b.x)**k``.

    Its boundary data and normal flux are nonzero on every side.
    """
    (a0, *a), (b0, *b) = _POLY_DIRS[dim]
    a, b = np.array(a), np.array(b)

    def value(x):
        return (a0 + x @ a) ** k + (b0 + x @ b) ** k

    def gradient(x):
        return k * (a0 + x @ a)[:, None] ** (k - 1) * a + k * (b0 + x @ b)[:, None] ** (k - 1) * b

    def laplacian(x):
        if k < 2:
            return np.zeros(len(x))
        return k * (k - 1) * ((a0 + x @ a) ** (k - 2) * (a @ a) + (b0 + x @ b) ** (k - 2) * (b @ b))

    return ExactSolution(value, gradient, laplacian, f"polynomial{k}")


def corner_power(dim: int, k: int, center=(1.0 / 3.0, 0.0, 0.5)) -> ExactSolution:
    """``r**k`` (``r**k log r`` for even ``k``) centred at a point of the bottom side.

    The trace has exactly ``H^{k+1/2 - eps}`` regularity, which makes the
    boundary estimates for the modified interpolant sharp.
    """
    c = np.array(center[:dim])
    even = k % 2 == 0

    def _r(x):
        return np.linalg.norm(x - c, axis=1)

    def value(x):
        r = _r(x)
        if not even:
            return r**k
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r > 0, r**k * np.log(r), 0.0)

    def gradient(x):
        d = x - c
        r = _r(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            if even:
                s = np.where(r > 0, r ** (k - 2) * (k * np.log(r) + 1.0), 0.0)
            else:
                s = np.where(r > 0, k * r ** (k - 2.0), 0.0)
        return s[:, None] * d

    def laplacian(x):
        r = _r(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            if even:
                # lap(r^k log r) = r^{k-2} [ (k^2 + k(d-2)) log r + 2k + d - 2 ]
                out = r ** (k - 2) * ((k * k + k * (dim - 2)) * np.log(r) + 2 * k + dim - 2)
            else:
                out = k * (k + dim - 2) * r ** (k - 2.0)
        return np.where(r > 0, out, 0.0)

    return ExactSolution(value, gradient, laplacian, f"corner_power{k}")


def custom(expr: str, dim: int) -> ExactSolution:
    """Build a solution from a sympy expression in ``x``, ``y`` (and ``z``)."""
    import sympy

    syms = sympy.symbols("x y z")[:dim]
    u = sympy.sympify(expr, locals={s.name: s for s in syms})
    grad = [sympy.diff(u, s) for s in syms]
    lap = sum(sympy.diff(u, s, 2) for s in syms)
    fu = sympy.lambdify(syms, u, "numpy")
    fg = [sympy.lambdify(syms, gi, "numpy") for gi in grad]
    fl = sympy.lambdify(syms, lap, "numpy")

    def _call(fn, x):
        return np.broadcast_to(np.asarray(fn(*x.T), dtype=float), (len(x),))

    return ExactSolution(
        lambda x: _call(fu, x),
        lambda x: np.column_stack([_call(g, x) for g in fg]),
        lambda x: _call(fl, x),
        f"custom:{expr}",
    )


SOLUTIONS = ("sine2d", "trig2d", "sine3d_vector", "polynomial", "custom")


def get_solution(name: str, dim: int, k: int, expr: str | None = None) -> tuple[ExactSolution, ...]:
    """Resolve a solution name to a tuple of scalar components."""
    if name == "sine2d":
        if dim != 2:
            raise ValueError("sine2d is two-dimensional")
        return (sine2d(),)
    if name == "trig2d":
        if dim != 2:
            raise ValueError("trig2d is two-dimensional")
        return (trig2d(),)
    if name == "sine3d_vector":
        if dim != 3:
            raise ValueError("sine3d_vector is three-dimensional")
        return sine3d_vector()
    if name in ("polynomial", "polynomial_k"):
        return (polynomial(dim, k),)
    if name == "custom":
        if not expr:
            raise ValueError("the custom solution needs an expression")
        return (custom(expr, dim),)
    raise ValueError(f"unknown solution {name!r}; choose from {', '.join(SOLUTIONS)}")
