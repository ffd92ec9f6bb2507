"""
Grid functions on discrete intervals and the discrete calculus on them.

Index convention follows the mathematical one: a Dirichlet grid function
on horizon ``T`` stores ``x(0), ..., x(T+1)`` with both ends pinned to zero;
a periodic-type one stores ``x(0), ..., x(T)`` with ``x(0) = x(T)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError
from .linalg import eigvalsh_tridiagonal


class BCKind(str, enum.Enum):
    DIRICHLET_ZERO = "dirichlet"
    PERIODIC_TYPE = "periodic"


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values on ``[0, T+1]`` (Dirichlet) or ``[0, T]`` (periodic-type).

    Use :meth:`dirichlet` / :meth:`periodic` to build one from the ``T``
    independent interior values; the raw constructor validates the storage
    invariants.
    """

    values: np.ndarray
    bc_kind: BCKind

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise InvalidInputError("grid function values must be one-dimensional")
        kind = BCKind(self.bc_kind)
        if kind is BCKind.DIRICHLET_ZERO:
            if v.size < 3:
                raise InvalidInputError("Dirichlet grid function needs T >= 1 (at least 3 values)")
            if v[0] != 0.0 or v[-1] != 0.0:
                raise InvalidInputError("Dirichlet grid function must vanish at k=0 and k=T+1")
        else:
            if v.size < 2:
                raise InvalidInputError("periodic-type grid function needs T >= 1 (at least 2 values)")
            if v[0] != v[-1]:
                raise InvalidInputError("periodic-type grid function must satisfy x(0) = x(T)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "bc_kind", kind)

    @classmethod
    def dirichlet(cls, interior) -> GridFunction:
        x = np.asarray(interior, dtype=float).ravel()
        return cls(np.concatenate(([0.0], x, [0.0])), BCKind.DIRICHLET_ZERO)

    @classmethod
    def periodic(cls, interior) -> GridFunction:
        """From ``x(1), ..., x(T)``; ``x(0)`` is set to ``x(T)``."""
        x = np.asarray(interior, dtype=float).ravel()
        if x.size == 0:
            raise InvalidInputError("periodic-type grid function needs T >= 1")
        return cls(np.concatenate(([x[-1]], x)), BCKind.PERIODIC_TYPE)

    @classmethod
    def zeros(cls, T: int, bc_kind=BCKind.DIRICHLET_ZERO) -> GridFunction:
        if BCKind(bc_kind) is BCKind.DIRICHLET_ZERO:
            return cls.dirichlet(np.zeros(T))
        return cls.periodic(np.zeros(T))

    @property
    def T(self) -> int:
        if self.bc_kind is BCKind.DIRICHLET_ZERO:
            return self.values.size - 2
        return self.values.size - 1

    @property
    def interior(self) -> np.ndarray:
        """The independent values ``x(1), ..., x(T)``."""
        return self.values[1 : self.T + 1]

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.bc_kind is other.bc_kind and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.bc_kind, self.values.tobytes()))


@dataclass(frozen=True)
class NormPair:
    """``energy`` is sqrt(sum_{k=1}^{T+1} (dy(k-1))^2); ``euclidean`` is sqrt(sum y(k)^2).

    ``energy_truncated`` keeps the differences k = 1..T only, i.e. it drops
    the first difference y(1) - y(0).
    """

    energy: float
    euclidean: float
    energy_truncated: float


def forward_difference(y, wrap: bool = False) -> np.ndarray:
    """
    Forward differences ``y(k+1) - y(k)`` over the stored values.

    Accepts a :class:`GridFunction` or a plain vector. With ``wrap=True`` a
    periodic-type function gets one extra entry ``x(1) - x(T)`` closing the
    cycle.
    """
    if isinstance(y, GridFunction):
        v = y.values
        periodic = y.bc_kind is BCKind.PERIODIC_TYPE
    else:
        v = np.asarray(y, dtype=float)
        periodic = False
    if v.ndim != 1 or v.size < 2:
        raise InvalidInputError("forward difference needs at least two values")
    d = np.diff(v)
    if wrap:
        if not periodic:
            raise InvalidInputError("wraparound differences need a periodic-type grid function")
        d = np.append(d, v[1] - v[-1])
    return d


def norms(y: GridFunction) -> NormPair:
    if not isinstance(y, GridFunction) or y.bc_kind is not BCKind.DIRICHLET_ZERO:
        raise InvalidInputError("norms are defined on Dirichlet grid functions")
    d = np.diff(y.values)
    return NormPair(
        energy=float(np.sqrt(np.dot(d, d))),
        euclidean=float(np.sqrt(np.dot(y.interior, y.interior))),
        energy_truncated=float(np.sqrt(np.dot(d[1:], d[1:]))),
    )


@lru_cache(maxsize=256)
def equivalence_constants(T: int) -> tuple[float, float]:
    """Sharp constants (gamma, gamma1) with gamma|y| <= ||y|| <= gamma1|y| on E.

    Square roots of the extreme eigenvalues of tridiag(-1, 2, -1) of size T,
    the matrix of the Dirichlet energy.
    """
    if int(T) != T or T < 1:
        raise InvalidInputError(f"T must be a positive integer, got {T!r}")
    T = int(T)
    lam = eigvalsh_tridiagonal(np.full(T, 2.0), np.full(T - 1, -1.0), indices=[0, T - 1])
    return float(np.sqrt(lam[0])), float(np.sqrt(lam[1]))
