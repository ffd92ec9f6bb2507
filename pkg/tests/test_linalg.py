import numpy as np
import pytest
from numpy.linalg import LinAlgError

from varbvp.linalg import (
    cyclic_to_dense,
    eigvalsh_tridiagonal,
    solve_cyclic_tridiagonal,
    solve_tridiagonal,
    sturm_count,
)


@pytest.mark.parametrize("n", [1, 2, 5, 40])
def test_thomas_matches_dense_solve(rng, n):
    lower, upper = rng.normal(size=n - 1), rng.normal(size=n - 1)
    diag = 4.0 + rng.uniform(size=n)
    rhs = rng.normal(size=n)
    A = cyclic_to_dense(lower, diag, upper)
    np.testing.assert_allclose(solve_tridiagonal(lower, diag, upper, rhs), np.linalg.solve(A, rhs), rtol=1e-12, atol=1e-12)


def test_thomas_zero_pivot():
    with pytest.raises(LinAlgError):
        solve_tridiagonal([1.0], [0.0, 1.0], [1.0], [1.0, 1.0])


@pytest.mark.parametrize("n", [1, 2, 3, 4, 17])
def test_cyclic_matches_dense_solve(rng, n):
    off = -rng.uniform(0.5, 2.0, size=n - 1)
    corner = -0.7
    diag = 5.0 + rng.uniform(size=n)
    rhs = rng.normal(size=n)
    A = cyclic_to_dense(off, diag, off, corner, corner)
    x = solve_cyclic_tridiagonal(off, diag, off, corner, corner, rhs)
    np.testing.assert_allclose(A @ x, rhs, atol=1e-11)


def test_sturm_count_brackets_known_spectrum():
    # tridiag(-1, 2, -1), n = 3: eigenvalues 2 - sqrt 2, 2, 2 + sqrt 2
    d, e = np.full(3, 2.0), np.full(2, -1.0)
    assert list(sturm_count(d, e, [0.0, 1.0, 2.5, 4.0])) == [0, 1, 2, 3]


@pytest.mark.parametrize("n", [1, 2, 7, 30])
def test_bisection_matches_numpy(rng, n):
    d, e = rng.normal(size=n), rng.normal(size=n - 1)
    expected = np.linalg.eigvalsh(cyclic_to_dense(e, d, e))
    np.testing.assert_allclose(eigvalsh_tridiagonal(d, e), expected, atol=1e-11)
    sel = eigvalsh_tridiagonal(d, e, indices=[0, n - 1])
    np.testing.assert_allclose(sel, expected[[0, -1]], atol=1e-11)


def test_bisection_rejects_bad_index():
    with pytest.raises(ValueError):
        eigvalsh_tridiagonal([1.0, 2.0], [0.5], indices=[2])
