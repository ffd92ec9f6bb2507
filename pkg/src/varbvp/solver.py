"""
Minimisation of the action functionals.

:func:`minimize` runs a damped Newton method with Armijo backtracking and
falls back to a scaled gradient step whenever the Newton direction is not a
descent direction. Because every accepted step lowers the action, starting
from the zero function yields a minimiser with ``J_u(x) <= J_u(0) = 0``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.linalg import LinAlgError

from .emden import (
    action_emden,
    action_increment_emden,
    build_matrices,
    hessian_emden,
    residual_emden,
)
from .errors import DivergenceError, InvalidInputError, PreconditionError, UnsupportedSizeError
from .functional import (
    action_dirichlet,
    action_increment_dirichlet,
    hessian_dirichlet,
    primitive_F,
    residual_dirichlet,
)
from .grid import BCKind, GridFunction
from .linalg import solve_tridiagonal
from .problems import DirichletProblem, EmdenProblem, ParameterFunction, Problem

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500
ARMIJO_C = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-16


@dataclass
class SolveReport:
    minimizer: GridFunction
    objective: float
    residual_inf_norm: float
    iterations: int
    converged: bool
    method_trace: list[tuple[int, float, float]] = field(default_factory=list)
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "objective": self.objective,
            "residual_inf_norm": self.residual_inf_norm,
            "iterations": self.iterations,
            "message": self.message,
            "bc_kind": self.minimizer.bc_kind.value,
            "minimizer": self.minimizer.values.tolist(),
            "method_trace": [list(row) for row in self.method_trace],
        }


@dataclass(frozen=True)
class CriticalPointCheck:
    is_critical: bool
    residual_inf_norm: float
    objective: float


class _DirichletModel:
    def __init__(self, prob: DirichletProblem, u: ParameterFunction):
        self.prob, self.u, self.T = prob, u, prob.T
        self.bc = BCKind.DIRICHLET_ZERO

    def value(self, z):
        return action_dirichlet(self.prob, z, self.u).value

    def increment(self, z, d):
        return action_increment_dirichlet(self.prob, z, d, self.u)

    def residual(self, z):
        return residual_dirichlet(self.prob, z, self.u)

    def hessian(self, z):
        H = hessian_dirichlet(self.prob, z, self.u)
        return H.diag, lambda rhs: solve_tridiagonal(H.off, H.diag, H.off, rhs)

    def quadratic_matrix(self):
        p = self.prob.p
        return np.diag(p[:-1] + p[1:]) - np.diag(p[1:-1], 1) - np.diag(p[1:-1], -1)

    def grid(self, z):
        return GridFunction.dirichlet(z)


class _EmdenModel:
    def __init__(self, prob: EmdenProblem, u: ParameterFunction):
        self.prob, self.u, self.T = prob, u, prob.T
        self.bc = BCKind.PERIODIC_TYPE
        mats = build_matrices(prob)
        self.mats = mats
        self.A = mats.M_mat + mats.Q_mat

    def value(self, z):
        return action_emden(self.prob, z, self.u).value

    def increment(self, z, d):
        return action_increment_emden(self.prob, z, d, self.u, self.A)

    def residual(self, z):
        return residual_emden(self.prob, z, self.u)

    def hessian(self, z):
        H = hessian_emden(self.prob, z, self.u)
        return H.diag, H.solve

    def quadratic_matrix(self):
        return self.A

    def grid(self, z):
        return GridFunction.periodic(z)


def _model(prob: Problem, u: ParameterFunction, allow_indefinite: bool = False):
    if u.T != prob.T:
        raise InvalidInputError(f"u has {u.T} values, problem has T = {prob.T}")
    if isinstance(prob, DirichletProblem):
        if not allow_indefinite:
            prob.require_a3()
        return _DirichletModel(prob, u)
    if isinstance(prob, EmdenProblem):
        model = _EmdenModel(prob, u)
        if not allow_indefinite and not model.mats.positive_definite:
            raise PreconditionError(
                f"M + Q is not positive definite (lambda_min = {model.mats.lambda_min:.6g}); "
                "pass allow_indefinite=True to solve anyway"
            )
        return model
    raise InvalidInputError(f"unsupported problem type {type(prob).__name__}")


def _initial(model, initial):
    if initial is None:
        return np.zeros(model.T)
    if isinstance(initial, GridFunction):
        if initial.bc_kind is not model.bc:
            raise InvalidInputError("initial guess has the wrong boundary-condition kind")
        z = np.array(initial.interior)
    else:
        z = np.array(initial, dtype=float).ravel()
    if z.size != model.T:
        raise InvalidInputError(f"initial guess has {z.size} values, expected {model.T}")
    return z


def _line_search(model, z, d, slope):
    """Backtrack from t = 1 until the Armijo condition holds; (t, dJ) or None."""
    t = 1.0
    while t >= MIN_STEP:
        dJ = model.increment(z, t * d)
        if math.isfinite(dJ) and dJ <= ARMIJO_C * t * slope and dJ < 0.0:
            return t, dJ
        t *= BACKTRACK
    return None


def _minimize_model(model, z, tol, max_iter):
    J = model.value(z)
    if not math.isfinite(J):
        raise DivergenceError(f"non-finite objective {J!r} at the initial point")
    res = model.residual(z)
    rn = float(np.max(np.abs(res)))
    trace = [(0, J, 0.0)]
    it = 0
    message = ""
    while rn > tol:
        if it >= max_iter:
            message = f"max_iter = {max_iter} reached"
            break
        grad = -res
        gnorm = float(np.linalg.norm(grad))
        diag, solve = model.hessian(z)
        directions = []
        try:
            d = solve(res)
            slope = float(grad @ d)
            if np.all(np.isfinite(d)) and slope < -1e-12 * gnorm * float(np.linalg.norm(d)):
                directions.append((d, slope))
        except (LinAlgError, ZeroDivisionError, FloatingPointError):
            pass
        scale = max(1.0, float(np.max(np.abs(diag))))
        directions.append((-grad / scale, -gnorm * gnorm / scale))

        accepted = None
        for d, slope in directions:
            accepted = _line_search(model, z, d, slope)
            if accepted is not None:
                break
        if accepted is None:
            message = "line search stalled"
            break
        t, dJ = accepted
        z = z + t * d
        J += dJ
        it += 1
        res = model.residual(z)
        if not np.all(np.isfinite(res)):
            raise DivergenceError(f"non-finite residual at iteration {it}")
        rn = float(np.max(np.abs(res)))
        trace.append((it, J, t))

    objective = model.value(z)
    if not math.isfinite(objective):
        raise DivergenceError(f"non-finite objective {objective!r} after {it} iterations")
    converged = rn <= tol
    if converged:
        message = "residual below tolerance"
    return SolveReport(model.grid(z), objective, rn, it, converged, trace, message)


def minimize(
    prob: Problem,
    u: ParameterFunction,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    initial=None,
    allow_indefinite: bool = False,
) -> SolveReport:
    """
    Minimise the action functional of ``prob`` for the parameter ``u``.

    Parameters
    ----------
    prob : DirichletProblem or EmdenProblem
    u : ParameterFunction
    tol : float
        Stop once the residual sup norm is at most ``tol``.
    max_iter : int
        Cap on accepted steps; hitting it gives ``converged=False``.
    initial : GridFunction or array_like, optional
        Starting point; the zero function by default.
    allow_indefinite : bool
        Skip the A3 / positive-definiteness gate.

    Raises
    ------
    PreconditionError
        If the quadratic part is not coercive and ``allow_indefinite`` is off.
    DivergenceError
        If the objective becomes non-finite.
    """
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    model = _model(prob, u, allow_indefinite)
    report = _minimize_model(model, _initial(model, initial), tol, max_iter)
    log.debug("minimize: %s after %d iterations, residual %.3e", report.message, report.iterations, report.residual_inf_norm)
    return report


def residual(prob: Problem, x, u: ParameterFunction) -> np.ndarray:
    if isinstance(prob, EmdenProblem):
        return residual_emden(prob, x, u)
    return residual_dirichlet(prob, x, u)


def action(prob: Problem, x, u: ParameterFunction) -> float:
    if isinstance(prob, EmdenProblem):
        return action_emden(prob, x, u).value
    return action_dirichlet(prob, x, u).value


def verify_critical_point(prob: Problem, x, u: ParameterFunction, tol: float = DEFAULT_TOL) -> CriticalPointCheck:
    rn = float(np.max(np.abs(residual(prob, x, u))))
    return CriticalPointCheck(is_critical=rn <= tol, residual_inf_norm=rn, objective=action(prob, x, u))


MAX_ORACLE_T = 4
MAX_ORACLE_POINTS = 41


def oracle_minimize(
    prob: Problem,
    u: ParameterFunction,
    box_radius: float,
    grid_points_per_axis: int = MAX_ORACLE_POINTS,
    tol: float = DEFAULT_TOL,
    allow_indefinite: bool = False,
) -> SolveReport:
    """
    Exhaustive grid search over ``[-box_radius, box_radius]^T`` plus a Newton polish.

    Only for T <= 4. The grid stage evaluates the action at every tensor
    grid point (primitives are tabulated once per axis value), so it does
    not depend on the descent path of :func:`minimize`.
    """
    if prob.T > MAX_ORACLE_T:
        raise UnsupportedSizeError(f"oracle search supports T <= {MAX_ORACLE_T}, got T = {prob.T}")
    n = int(grid_points_per_axis)
    if n < 2 or n > MAX_ORACLE_POINTS:
        raise InvalidInputError(f"grid_points_per_axis must lie in [2, {MAX_ORACLE_POINTS}]")
    if not box_radius > 0:
        raise InvalidInputError("box_radius must be positive")
    model = _model(prob, u, allow_indefinite)
    T = prob.T
    axis = np.linspace(-box_radius, box_radius, n)

    A = model.quadratic_matrix()
    zs = [axis.reshape([n if j == i else 1 for j in range(T)]) for i in range(T)]
    J = np.zeros([n] * T)
    for i, j in itertools.product(range(T), repeat=2):
        if A[i, j] != 0.0:
            J = J + 0.5 * A[i, j] * zs[i] * zs[j]
    for i in range(T):
        Fi = np.array([primitive_F(prob.f, i + 1, float(y), float(u.values[i])) for y in axis])
        J = J - Fi.reshape(zs[i].shape) + prob.g[i] * zs[i]

    best = np.unravel_index(int(np.argmin(J)), J.shape)
    z0 = axis[list(best)]
    grid_J = float(J[best])
    polished = _minimize_model(model, z0, tol, DEFAULT_MAX_ITER)
    polished.method_trace.insert(0, (-1, grid_J, 0.0))
    polished.message = f"grid best {grid_J:.17g}; polish: {polished.message}"
    return polished
