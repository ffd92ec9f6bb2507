"""Banded linear algebra: Thomas solves and Sturm-sequence bisection.

Everything here works on the three diagonals of a (cyclic) tridiagonal
matrix and costs O(n) per solve or per Sturm count.
"""

import numpy as np
from numpy.linalg import LinAlgError


def solve_tridiagonal(lower, diag, upper, rhs):
    """
    Solve a tridiagonal system with the Thomas algorithm.

    Parameters
    ----------
    lower : array_like
        Sub-diagonal, length n-1 (``A[i+1, i]``).
    diag : array_like
        Main diagonal, length n.
    upper : array_like
        Super-diagonal, length n-1 (``A[i, i+1]``).
    rhs : array_like
        Right hand side, length n.

    Returns
    -------
    x : ndarray
        Solution vector.

    Raises
    ------
    LinAlgError
        If a zero pivot is met (no pivoting is performed).
    """
    b = np.array(diag, dtype=float)
    d = np.array(rhs, dtype=float)
    a = np.asarray(lower, dtype=float)
    c = np.asarray(upper, dtype=float)
    n = b.size
    if d.size != n or a.size != max(n - 1, 0) or c.size != max(n - 1, 0):
        raise ValueError("inconsistent diagonal lengths")

    for k in range(1, n):
        if b[k - 1] == 0.0:
            raise LinAlgError("zero pivot in tridiagonal solve")
        w = a[k - 1] / b[k - 1]
        b[k] -= w * c[k - 1]
        d[k] -= w * d[k - 1]
    if b[n - 1] == 0.0:
        raise LinAlgError("zero pivot in tridiagonal solve")

    x = np.empty(n)
    x[n - 1] = d[n - 1] / b[n - 1]
    for k in range(n - 2, -1, -1):
        x[k] = (d[k] - c[k] * x[k + 1]) / b[k]
    return x


def solve_cyclic_tridiagonal(lower, diag, upper, top_right, bottom_left, rhs):
    """
    Solve a cyclic tridiagonal system by a Sherman-Morrison correction.

    The matrix has the tridiagonal band plus ``A[0, n-1] = top_right`` and
    ``A[n-1, 0] = bottom_left``. Systems with n < 3 have no distinct corners
    and are solved densely.
    """
    diag = np.asarray(diag, dtype=float)
    n = diag.size
    if n < 3:
        return np.linalg.solve(cyclic_to_dense(lower, diag, upper, top_right, bottom_left), rhs)

    gamma = -diag[0] if diag[0] != 0.0 else -1.0
    bb = diag.copy()
    bb[0] -= gamma
    bb[-1] -= bottom_left * top_right / gamma

    x = solve_tridiagonal(lower, bb, upper, rhs)
    u = np.zeros(n)
    u[0] = gamma
    u[-1] = bottom_left
    z = solve_tridiagonal(lower, bb, upper, u)

    denom = 1.0 + z[0] + top_right * z[-1] / gamma
    if denom == 0.0:
        raise LinAlgError("singular cyclic tridiagonal matrix")
    fact = (x[0] + top_right * x[-1] / gamma) / denom
    return x - fact * z


def cyclic_to_dense(lower, diag, upper, top_right=0.0, bottom_left=0.0):
    """Assemble the dense matrix; corner entries add onto the band for n < 3."""
    diag = np.asarray(diag, dtype=float)
    n = diag.size
    A = np.diag(diag)
    if n > 1:
        A += np.diag(np.asarray(lower, dtype=float), -1)
        A += np.diag(np.asarray(upper, dtype=float), 1)
    A[0, n - 1] += top_right
    A[n - 1, 0] += bottom_left
    return A


def sturm_count(diag, off, shifts):
    """
    Number of eigenvalues strictly below each shift.

    Counts negative pivots of the LDL^T factorisation of ``A - shift*I``,
    vectorised over the shifts.
    """
    d = np.asarray(diag, dtype=float)
    e2 = np.asarray(off, dtype=float) ** 2
    s = np.atleast_1d(np.asarray(shifts, dtype=float))
    tiny = np.finfo(float).tiny * 1e3

    q = d[0] - s
    q = np.where(q == 0.0, -tiny, q)
    count = (q < 0).astype(int)
    for i in range(1, d.size):
        q = d[i] - s - e2[i - 1] / q
        q = np.where(q == 0.0, -tiny, q)
        count += q < 0
    return count


def gershgorin_bounds(diag, off):
    d = np.asarray(diag, dtype=float)
    e = np.abs(np.asarray(off, dtype=float))
    radius = np.zeros_like(d)
    radius[:-1] += e
    radius[1:] += e
    return float(np.min(d - radius)), float(np.max(d + radius))


def eigvalsh_tridiagonal(diag, off, indices=None, tol=1e-12):
    """
    Eigenvalues of a symmetric tridiagonal matrix by Sturm bisection.

    Parameters
    ----------
    diag : array_like
        Main diagonal, length n.
    off : array_like
        Off-diagonal, length n-1.
    indices : sequence of int, optional
        Which eigenvalues to return, in ascending order (0 is the smallest).
        All of them by default.
    tol : float
        Absolute width of the final bisection bracket.

    Returns
    -------
    ndarray
        The selected eigenvalues, ascending.
    """
    d = np.asarray(diag, dtype=float)
    n = d.size
    if n == 0:
        raise ValueError("empty matrix")
    if np.asarray(off).size != n - 1:
        raise ValueError("off-diagonal must have length n-1")
    idx = np.arange(n) if indices is None else np.asarray(indices, dtype=int)
    if np.any(idx < 0) or np.any(idx >= n):
        raise ValueError("eigenvalue index out of range")

    lo_b, hi_b = gershgorin_bounds(d, off)
    pad = tol + 1e-14 * max(abs(lo_b), abs(hi_b), 1.0)
    lo = np.full(idx.size, lo_b - pad)
    hi = np.full(idx.size, hi_b + pad)
    # invariant: count(lo) <= idx < count(hi)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            # bracket cannot shrink further in floating point
            break
        below = sturm_count(d, off, mid) > idx
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return 0.5 * (lo + hi)
