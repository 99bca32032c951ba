import numpy as np
import pytest
import scipy.sparse as sp

from nitschefem.assembly import LinearSystem, NitscheConfig, assemble_system
from nitschefem.solutions import sine2d
from nitschefem.solver import (
    ConvergenceError,
    SingularMatrixError,
    relative_residual,
    solve,
    solve_direct,
    solve_krylov,
)

from conftest import cached_space


def _system(k=1, level=3, cfg=NitscheConfig()):
    u = sine2d()
    return assemble_system(cached_space(2, level, k), cfg, u.rhs, u.value)


def test_zero_rhs():
    s = _system()
    z = LinearSystem(s.matrix, np.zeros(s.matrix.shape[0]))
    x, _ = solve_direct(z)
    np.testing.assert_array_equal(x, 0.0)
    x, stats = solve_krylov(z)
    assert stats.iterations == 0 and not x.any()


def test_diagonal_system():
    d = np.linspace(1.0, 3.0, 7)
    b = np.arange(7.0) - 2.0
    x, _ = solve_direct(LinearSystem(sp.diags(d).tocsr(), b))
    np.testing.assert_allclose(x, b / d, rtol=1e-15)


def test_table1_setup_residual():
    s = _system(1, 3)
    x, stats = solve_direct(s)
    assert stats.residual < 1e-11
    # reported residual recomputed independently
    r = np.linalg.norm(s.rhs - s.matrix.toarray() @ x) / np.linalg.norm(s.rhs)
    assert abs(stats.residual - r) < 1e-14


def test_singular_pivot_reported():
    A = sp.csr_matrix(np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0, 0.0, 1.0]]))
    with pytest.raises(SingularMatrixError) as info:
        solve_direct(LinearSystem(A, np.ones(3)))
    assert info.value.pivot is not None
    assert str(info.value.pivot) in str(info.value)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize(
    "cfg", [NitscheConfig(1, 1.0, 1.0), NitscheConfig(1, 2.0, 1.0), NitscheConfig(1, 1.0, 0.0)],
    ids=["alpha1", "alpha2", "c0zero"],
)
def test_direct_and_gmres_agree(k, cfg):
    s = _system(k, 4 if k < 3 else 3, cfg)
    xd, _ = solve(s, "direct")
    xk, stats = solve(s, "krylov", tol=1e-12)
    assert stats.residual <= 1e-12
    assert np.abs(xd - xk).max() < 1e-9


@pytest.mark.parametrize("k", [1, 2])
def test_cg_on_symmetric_mode(k, rng):
    s = _system(k, 4, NitscheConfig(-1, 1.0, None))
    for _ in range(20):
        v = rng.standard_normal(s.matrix.shape[0])
        assert v @ (s.matrix @ v) > 0
    xc, stats = solve(s, "cg", tol=1e-12)
    xd, _ = solve(s, "direct")
    assert stats.residual <= 1e-12
    assert np.abs(xc - xd).max() < 1e-9


def test_gmres_restart_is_honoured():
    s = _system(2, 3)
    x1, st1 = solve_krylov(s, tol=1e-12, restart=5)
    x2, st2 = solve_krylov(s, tol=1e-12, restart=200)
    assert st1.iterations > st2.iterations
    assert np.abs(x1 - x2).max() < 1e-9


def test_non_convergence():
    s = _system(2, 4)
    with pytest.raises(ConvergenceError) as info:
        solve_krylov(s, tol=1e-14, max_iter=3)
    assert info.value.stats.iterations == 3
    assert info.value.x.shape == s.rhs.shape


@pytest.mark.parametrize("kwargs", [dict(tol=0.0), dict(method="bicg")])
def test_bad_krylov_arguments(kwargs):
    with pytest.raises(ValueError):
        solve_krylov(_system(), **kwargs)


def test_unknown_method():
    with pytest.raises(ValueError):
        solve(_system(), "qr")


def test_multi_rhs_direct():
    s = _system(1, 3)
    B = np.column_stack([s.rhs, 2 * s.rhs])
    X, stats = solve_direct(LinearSystem(s.matrix, B))
    np.testing.assert_allclose(X[:, 1], 2 * X[:, 0], rtol=1e-13)
    assert relative_residual(s.matrix, X, B) == stats.residual < 1e-11
