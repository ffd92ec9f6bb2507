"""
Action functional of the Dirichlet problem, its gradient and Hessian.

For ``x`` in E (``x(0) = x(T+1) = 0``) and a parameter ``u``::

    J_u(x) = sum_{k=1}^{T+1} p(k)/2 (x(k) - x(k-1))^2
             - sum_{k=1}^{T} F(k, x(k), u(k)) + sum_{k=1}^{T} g(k) x(k)

with ``F`` the primitive of ``f`` in its second argument. Sign convention:
the gradient of ``J_u`` equals minus :func:`residual_dirichlet`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, QuadratureError
from .grid import BCKind, GridFunction
from .problems import DirichletProblem, Nonlinearity, ParameterFunction
from .quadrature import adaptive_simpson

DEFAULT_QUAD_TOL = 1e-10
DEFAULT_QUAD_BUDGET = 2**15
DEFAULT_FD_STEP = 1e-6


@dataclass(frozen=True)
class ActionEvaluation:
    value: float
    quadratic_part: float
    potential_part: float
    linear_part: float


@dataclass(frozen=True)
class SymTridiagonal:
    """Symmetric tridiagonal matrix stored by its diagonal and off-diagonal."""

    diag: np.ndarray
    off: np.ndarray

    @property
    def shape(self):
        return (self.diag.size, self.diag.size)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def matvec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = self.diag * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out


# --------------------------------------------------------------------------
# primitive F
# --------------------------------------------------------------------------


def primitive_F(
    f: Nonlinearity,
    k: int,
    y: float,
    u: float,
    tol: float = DEFAULT_QUAD_TOL,
    max_intervals: int = DEFAULT_QUAD_BUDGET,
) -> float:
    """F(k, y, u) = integral of f(k, t, u) for t in [0, y].

    Uses the closed form when the nonlinearity carries one, otherwise
    adaptive Simpson quadrature with absolute tolerance ``tol``.
    """
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    if y == 0:
        return 0.0
    if f.primitive is not None:
        return float(f.primitive(k, y, u))
    value, _ = adaptive_simpson(lambda t: float(f(k, t, u)), 0.0, float(y), tol, max_intervals)
    return value


def potential_sum(f: Nonlinearity, z, u, tol: float = DEFAULT_QUAD_TOL) -> float:
    """sum_k F(k, z[k-1], u[k-1]) over k = 1..len(z)."""
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    ks = np.arange(1, z.size + 1)
    if f.primitive is not None:
        return float(np.sum(f.primitive(ks, z, u)))
    # per-point tolerance so the sum meets tol
    pt_tol = tol / max(z.size, 1)
    return float(sum(primitive_F(f, int(k), float(y), float(v), pt_tol) for k, y, v in zip(ks, z, u)))


def potential_increment(f: Nonlinearity, z, d, u, rel_threshold: float = 1e-2) -> float:
    """sum_k [F(k, z_k + d_k, u_k) - F(k, z_k, u_k)] without cancellation.

    Short steps are integrated directly over ``[z_k, z_k + d_k]``; differencing
    two large primitive values would lose the increment to rounding exactly
    when a line search needs it most.
    """
    z = np.asarray(z, dtype=float)
    d = np.asarray(d, dtype=float)
    u = np.asarray(u, dtype=float)
    ks = np.arange(1, z.size + 1)
    short = np.abs(d) <= rel_threshold * (1.0 + np.abs(z))
    if f.primitive is None:
        short = np.ones_like(short)
    total = 0.0
    if np.any(~short):
        kk, zz, dd, uu = ks[~short], z[~short], d[~short], u[~short]
        total += float(np.sum(f.primitive(kk, zz + dd, uu) - f.primitive(kk, zz, uu)))
    for k, y, s, v in zip(ks[short], z[short], d[short], u[short]):
        if s == 0.0:
            continue
        k, v = int(k), float(v)
        scale = abs(s) * (1.0 + abs(float(f(k, y, v))))
        try:
            val, _ = adaptive_simpson(
                lambda t: float(f(k, t, v)), float(y), float(y + s), max(1e-15 * scale, 1e-300), 2**12
            )
        except QuadratureError as exc:
            val = exc.estimate
        total += val
    return total


# --------------------------------------------------------------------------
# Dirichlet action
# --------------------------------------------------------------------------


def _check_dirichlet(prob: DirichletProblem, x, u: ParameterFunction) -> np.ndarray:
    if isinstance(x, GridFunction):
        if x.bc_kind is not BCKind.DIRICHLET_ZERO:
            raise InvalidInputError("Dirichlet action needs a Dirichlet grid function")
        z = x.interior
    else:
        z = np.asarray(x, dtype=float)
    if z.size != prob.T:
        raise InvalidInputError(f"x has horizon {z.size}, problem has T = {prob.T}")
    if u.T != prob.T:
        raise InvalidInputError(f"u has {u.T} values, problem has T = {prob.T}")
    return z


def _pad(z):
    return np.concatenate(([0.0], z, [0.0]))


def action_dirichlet(prob: DirichletProblem, x, u: ParameterFunction, tol: float = DEFAULT_QUAD_TOL) -> ActionEvaluation:
    z = _check_dirichlet(prob, x, u)
    dx = np.diff(_pad(z))
    quad = 0.5 * float(np.dot(prob.p, dx * dx))
    pot = potential_sum(prob.f, z, u.values, tol)
    lin = float(np.dot(prob.g, z))
    return ActionEvaluation(value=quad - pot + lin, quadratic_part=quad, potential_part=pot, linear_part=lin)


def action_increment_dirichlet(prob: DirichletProblem, z, d, u: ParameterFunction) -> float:
    """J_u(z + d) - J_u(z) on interior vectors, evaluated term by term."""
    dz = np.diff(_pad(z))
    dd = np.diff(_pad(d))
    quad = float(np.dot(prob.p, dz * dd + 0.5 * dd * dd))
    return quad - potential_increment(prob.f, z, d, u.values) + float(np.dot(prob.g, d))


def residual_dirichlet(prob: DirichletProblem, x, u: ParameterFunction) -> np.ndarray:
    """res(k) = D(p(k) D x(k-1)) + f(k, x(k), u(k)) - g(k), k = 1..T."""
    z = _check_dirichlet(prob, x, u)
    flux = prob.p * np.diff(_pad(z))  # p(k) (x(k) - x(k-1)), k = 1..T+1
    ks = np.arange(1, prob.T + 1)
    fz = np.asarray(prob.f(ks, z, u.values), dtype=float) * np.ones(prob.T)
    return np.diff(flux) + fz - prob.g


def gradient_dirichlet(prob: DirichletProblem, x, u: ParameterFunction) -> np.ndarray:
    return -residual_dirichlet(prob, x, u)


def f_derivative(f: Nonlinearity, ks, z, u, fd_step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """df/dy at the given points; central differences when no derivative is registered."""
    z = np.asarray(z, dtype=float)
    if f.dfdy is not None:
        return np.asarray(f.dfdy(ks, z, u), dtype=float) * np.ones(z.size)
    h = fd_step * (1.0 + np.abs(z))
    return (np.asarray(f(ks, z + h, u), dtype=float) - np.asarray(f(ks, z - h, u), dtype=float)) / (2.0 * h)


def hessian_dirichlet(prob: DirichletProblem, x, u: ParameterFunction, fd_step: float = DEFAULT_FD_STEP) -> SymTridiagonal:
    """Hessian of J_u: diag p(k) + p(k+1) - df/dy(k, x(k), u(k)), off-diagonal -p(k+1)."""
    if not fd_step > 0:
        raise InvalidInputError("fd_step must be positive")
    z = _check_dirichlet(prob, x, u)
    ks = np.arange(1, prob.T + 1)
    fy = f_derivative(prob.f, ks, z, u.values, fd_step)
    diag = prob.p[:-1] + prob.p[1:] - fy
    off = -prob.p[1:-1].copy()
    return SymTridiagonal(diag, off)


def finite_difference_gradient(fun, z, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function of a vector."""
    z = np.asarray(z, dtype=float)
    g = np.empty(z.size)
    for i in range(z.size):
        h = step * (1.0 + abs(z[i]))
        e = np.zeros(z.size)
        e[i] = h
        g[i] = (fun(z + e) - fun(z - e)) / (2.0 * h)
    return g
