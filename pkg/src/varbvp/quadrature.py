"""Adaptive composite Simpson quadrature."""

from collections.abc import Callable

import numpy as np

from .errors import QuadratureError


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_intervals: int = 2**15,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]`` with adaptive Simpson's rule.

    Intervals are refined until the Richardson error estimate of each leaf
    is below its share of ``tol`` (shares are proportional to length).
    ``b < a`` is allowed and flips the sign.

    Returns
    -------
    (value, error_estimate)

    Raises
    ------
    QuadratureError
        When more than ``max_intervals`` leaves would be needed; the exception
        carries the estimate obtained so far.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a == b:
        return 0.0, 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0

    width = b - a
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = width / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    err_total = 0.0
    leaves = 1
    budget_hit = False
    # explicit stack instead of recursion: (a, b, fa, fm, fb, whole)
    stack = [(a, b, fa, fm, fb, whole)]
    while stack:
        lo, hi, flo, fmid, fhi, s = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        h6 = (hi - lo) / 12.0
        left = h6 * (flo + 4.0 * flm + fmid)
        right = h6 * (fmid + 4.0 * frm + fhi)
        err = (left + right - s) / 15.0
        local_tol = tol * (hi - lo) / width
        if abs(err) <= local_tol or mid in (lo, hi) or budget_hit:
            total += left + right + err
            err_total += abs(err)
            continue
        if leaves + 1 > max_intervals:
            budget_hit = True
            total += left + right + err
            err_total += abs(err)
            continue
        leaves += 1
        stack.append((mid, hi, fmid, frm, fhi, right))
        stack.append((lo, mid, flo, flm, fmid, left))

    if budget_hit:
        raise QuadratureError(
            f"adaptive Simpson exceeded {max_intervals} intervals on [{a}, {b}]",
            sign * total,
            err_total,
        )
    return sign * total, err_total


def batch_simpson(
    f: Callable,
    a,
    b,
    tol=1e-8,
    max_depth: int = 60,
    max_intervals: int = 2**20,
) -> tuple[np.ndarray, np.ndarray]:
    """Adaptive Simpson for many integrands at once.

    Row ``j`` integrates ``t -> f(j, t)`` over ``[a[j], b[j]]`` to absolute
    tolerance ``tol`` (a scalar or one value per row). ``f(rows, t)`` receives equal-shape arrays of row
    indices and nodes and must return values of the same shape. All open
    intervals across rows are refined together, one call of ``f`` per sweep.

    A panel is accepted when its two halves change the estimate by at most
    its share of ``tol``. That bound is conservative for any convergence
    order of at least one, so kinks in the integrand are refined locally
    instead of being mistaken for converged.

    Returns
    -------
    (values, error_estimates)

    Raises
    ------
    QuadratureError
        When ``max_depth`` halvings or ``max_intervals`` open panels do not
        suffice; the partial estimate is attached.
    """
    a, b, tol = (v.ravel() for v in np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, tol))))
    if np.any(tol <= 0):
        raise ValueError("tol must be positive")
    rows = np.arange(a.size)
    width = np.where(b != a, np.abs(b - a), 1.0)
    out = np.zeros(a.size)
    err_out = np.zeros(a.size)

    lo, hi, rr = a.copy(), b.copy(), rows
    vals = f(np.concatenate((rr, rr, rr)), np.concatenate((lo, 0.5 * (lo + hi), hi)))
    flo, fmid, fhi = np.split(np.asarray(vals, dtype=float), 3)
    whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    for _ in range(max_depth):
        if rr.size == 0:
            return out, err_out
        if rr.size > max_intervals:
            break
        mid = 0.5 * (lo + hi)
        qs = np.split(np.asarray(f(np.concatenate((rr, rr)), np.concatenate((0.5 * (lo + mid), 0.5 * (mid + hi)))), dtype=float), 2)
        flm, frm = qs
        h12 = (hi - lo) / 12.0
        left = h12 * (flo + 4.0 * flm + fmid)
        right = h12 * (fmid + 4.0 * frm + fhi)
        diff = np.abs(left + right - whole)
        done = diff <= tol[rr] * np.abs(hi - lo) / width[rr]
        np.add.at(out, rr[done], (left + right)[done])
        np.add.at(err_out, rr[done], diff[done])

        keep = ~done
        rr, lo, mid, hi = rr[keep], lo[keep], mid[keep], hi[keep]
        flo, flm, fmid, frm, fhi = flo[keep], flm[keep], fmid[keep], frm[keep], fhi[keep]
        left, right = left[keep], right[keep]
        rr = np.concatenate((rr, rr))
        lo, hi = np.concatenate((lo, mid)), np.concatenate((mid, hi))
        flo, fmid, fhi = np.concatenate((flo, fmid)), np.concatenate((flm, frm)), np.concatenate((fmid, fhi))
        whole = np.concatenate((left, right))

    np.add.at(out, rr, whole)
    raise QuadratureError(
        f"batched adaptive Simpson did not converge within depth {max_depth} "
        f"({rr.size} open panels)",
        out,
        None,
    )
