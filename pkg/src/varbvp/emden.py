"""
Discrete Emden-Fowler problem with periodic-type boundary conditions.

The quadratic part of the action is ``x^T (M + Q) x / 2`` where ``M`` is the
cyclic weighted graph Laplacian with edge weights ``p(k)`` between nodes
``k`` and ``k+1`` (k = 1..T-1) and ``p(0)`` on the closing edge between
``T`` and ``1``, and ``Q = diag(-q(1), ..., -q(T))``. Grid functions keep the
T independent values ``x(1..T)``; ``x(0) = x(T)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .functional import (
    DEFAULT_FD_STEP,
    DEFAULT_QUAD_TOL,
    ActionEvaluation,
    f_derivative,
    potential_increment,
    potential_sum,
)
from .grid import BCKind, GridFunction
from .linalg import cyclic_to_dense, solve_cyclic_tridiagonal
from .problems import EmdenProblem, ParameterFunction


@dataclass(frozen=True)
class StructuralMatrices:
    M_mat: np.ndarray
    Q_mat: np.ndarray
    lambda_min: float
    lambda_max: float

    @property
    def a(self) -> float:
        """Smallest eigenvalue of M + Q (the coercivity constant when positive)."""
        return self.lambda_min

    @property
    def positive_definite(self) -> bool:
        return self.lambda_min > 0.0


@dataclass(frozen=True)
class CyclicTridiagonal:
    """Symmetric cyclic tridiagonal matrix; ``corner`` sits at (0, n-1) and (n-1, 0)."""

    diag: np.ndarray
    off: np.ndarray
    corner: float

    def to_dense(self) -> np.ndarray:
        return cyclic_to_dense(self.off, self.diag, self.off, self.corner, self.corner)

    def matvec(self, v) -> np.ndarray:
        return self.to_dense() @ np.asarray(v, dtype=float)

    def solve(self, rhs) -> np.ndarray:
        return solve_cyclic_tridiagonal(self.off, self.diag, self.off, self.corner, self.corner, rhs)


def _bands(prob: EmdenProblem):
    """Diagonal, off-diagonal and corner of M (band form, before merging for T < 3)."""
    p = prob.p
    T = prob.T
    diag = np.empty(T)
    if T == 1:
        return np.zeros(1), np.zeros(0), 0.0
    diag[0] = p[0] + p[1]
    diag[1:T - 1] = p[1:T - 1] + p[2:T]
    diag[T - 1] = p[T - 1] + p[0]
    return diag, -p[1:T].copy(), -float(p[0])


def build_matrices(prob: EmdenProblem) -> StructuralMatrices:
    """Assemble M and Q and the extreme eigenvalues of M + Q."""
    diag, off, corner = _bands(prob)
    if prob.T == 1:
        M = np.zeros((1, 1))
    else:
        M = cyclic_to_dense(off, diag, off, corner, corner)
    Q = np.diag(-prob.q)
    lam = np.linalg.eigvalsh(M + Q)
    return StructuralMatrices(M, Q, float(lam[0]), float(lam[-1]))


def _interior(prob: EmdenProblem, x, u: ParameterFunction) -> np.ndarray:
    if isinstance(x, GridFunction):
        if x.bc_kind is not BCKind.PERIODIC_TYPE:
            raise InvalidInputError("Emden functions need a periodic-type grid function")
        z = x.interior
    else:
        z = np.asarray(x, dtype=float)
    if z.ndim != 1 or z.size != prob.T:
        raise InvalidInputError(f"x has {z.size} values, problem has T = {prob.T}")
    if u.T != prob.T:
        raise InvalidInputError(f"u has {u.T} values, problem has T = {prob.T}")
    return z


def quadratic_form(prob: EmdenProblem, z) -> float:
    mats = build_matrices(prob)
    return 0.5 * float(z @ (mats.M_mat + mats.Q_mat) @ z)


def action_emden(prob: EmdenProblem, x, u: ParameterFunction, tol: float = DEFAULT_QUAD_TOL) -> ActionEvaluation:
    """J_u(x) = <(M + Q) x, x>/2 - sum F + sum g x."""
    z = _interior(prob, x, u)
    quad = quadratic_form(prob, z)
    pot = potential_sum(prob.f, z, u.values, tol)
    lin = float(np.dot(prob.g, z))
    return ActionEvaluation(value=quad - pot + lin, quadratic_part=quad, potential_part=pot, linear_part=lin)


def action_increment_emden(prob: EmdenProblem, z, d, u: ParameterFunction, A=None) -> float:
    """J_u(z + d) - J_u(z) evaluated term by term."""
    if A is None:
        mats = build_matrices(prob)
        A = mats.M_mat + mats.Q_mat
    Ad = A @ d
    quad = float(z @ Ad + 0.5 * d @ Ad)
    return quad - potential_increment(prob.f, z, d, u.values) + float(np.dot(prob.g, d))


def stencil(prob: EmdenProblem, z) -> np.ndarray:
    """D(p(k-1) D x(k-1)) + q(k) x(k) for k = 1..T with the cyclic closure.

    The flux through the seam, p(T) D x(T), is replaced by p(0) D x(0)
    as the boundary condition prescribes.
    """
    z = np.asarray(z, dtype=float)
    T = prob.T
    ext = np.concatenate(([z[-1]], z))  # x(0..T) with x(0) = x(T)
    flux = prob.p[:T] * np.diff(ext)  # p(k) (x(k+1) - x(k)), k = 0..T-1
    flux = np.append(flux, flux[0])
    return np.diff(flux) + prob.q * z


def residual_emden(prob: EmdenProblem, x, u: ParameterFunction) -> np.ndarray:
    """Residual of the Emden-Fowler equation; equals minus the gradient of the action."""
    z = _interior(prob, x, u)
    ks = np.arange(1, prob.T + 1)
    fz = np.asarray(prob.f(ks, z, u.values), dtype=float) * np.ones(prob.T)
    return stencil(prob, z) + fz - prob.g


def hessian_emden(prob: EmdenProblem, x, u: ParameterFunction, fd_step: float = DEFAULT_FD_STEP) -> CyclicTridiagonal:
    z = _interior(prob, x, u)
    ks = np.arange(1, prob.T + 1)
    fy = f_derivative(prob.f, ks, z, u.values, fd_step)
    diag, off, corner = _bands(prob)
    return CyclicTridiagonal(diag - prob.q - fy, off, corner)


@dataclass(frozen=True)
class NontrivialityResult:
    nontrivial: bool
    witness: int | None
    a7_holds: bool
    zero_residual_inf_norm: float | None


def nontriviality_check(prob: EmdenProblem, x, u: ParameterFunction | None = None, tol: float = 1e-10) -> NontrivialityResult:
    """Whether ``x`` is away from zero, with the A7 witness k1 (first k with g(k1) != 0).

    When ``u`` is given, the residual of the zero function is reported too:
    a nonzero value confirms that 0 is not a critical point.
    """
    if isinstance(x, GridFunction):
        z = x.interior
    else:
        z = np.asarray(x, dtype=float)
    nz = np.flatnonzero(prob.g != 0.0)
    witness = int(nz[0]) + 1 if nz.size else None
    zero_res = None
    if u is not None:
        zero_res = float(np.max(np.abs(residual_emden(prob, np.zeros(prob.T), u))))
    return NontrivialityResult(
        nontrivial=bool(np.linalg.norm(z) > 10.0 * tol),
        witness=witness,
        a7_holds=witness is not None,
        zero_residual_inf_norm=zero_res,
    )
