"""
Problem descriptions, the nonlinearity registry and parameter functions.

Two problem kinds are supported:

* :class:`DirichletProblem` --
  ``D(p(k) D x(k-1)) + f(k, x(k), u(k)) = g(k)``, ``x(0) = x(T+1) = 0``;
* :class:`EmdenProblem` --
  ``D(p(k-1) D x(k-1)) + q(k) x(k) + f(k, x(k), u(k)) = g(k)`` with
  ``x(0) = x(T)`` and ``p(0) D x(0) = p(T) D x(T)``.

Both are serialised to a small JSON document (see :func:`problem_to_dict`).
"""

from __future__ import annotations

import json
import math
import warnings
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import numpy as np

from .errors import InvalidInputError, PreconditionError, SchemaError

SQRT2 = math.sqrt(2.0)


# --------------------------------------------------------------------------
# nonlinearities
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """A nonlinearity ``f(k, y, u)`` with optional closed-form extras.

    ``func``, ``primitive`` and ``dfdy`` all take ``(k, y, u)`` and should
    broadcast over numpy arrays. ``primitive(k, y, u)`` must equal the
    integral of ``f(k, t, u)`` over ``t`` in ``[0, y]``.

    Builtins carry ``name``/``params`` so they can be written back to a
    problem file; hand-built instances default to the name ``"custom"`` and
    are not serialisable.
    """

    func: Callable
    primitive: Callable | None = None
    dfdy: Callable | None = None
    name: str = "custom"
    params: Mapping[str, Any] = field(default_factory=dict)
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __call__(self, k, y, u):
        return self.func(k, y, u)

    def to_dict(self) -> dict:
        if self.name not in BUILTINS:
            raise SchemaError(f"f: nonlinearity {self.name!r} is not a registered builtin")
        return {"name": self.name, "params": _jsonable(dict(self.params))}

    def __eq__(self, other):
        if not isinstance(other, Nonlinearity):
            return NotImplemented
        if self.name == "custom" or other.name == "custom":
            return self is other
        return self.name == other.name and _jsonable(dict(self.params)) == _jsonable(dict(other.params))

    def __hash__(self):
        return hash((self.name, json.dumps(_jsonable(dict(self.params)), sort_keys=True)))


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _k_weight(spec) -> Callable:
    """Weight in k: a constant, or a list indexed by k = 1..T."""
    if spec is None:
        return lambda k: 1.0
    if isinstance(spec, (int, float)):
        c = float(spec)
        return lambda k: c
    arr = np.asarray(spec, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError("q weight must be a number or a non-empty list")
    return lambda k: arr[np.asarray(k, dtype=int) - 1]


def _u_weight(spec) -> Callable:
    """Weight in u: a constant or a piecewise-linear table {"u": [...], "values": [...]}."""
    if spec is None:
        return lambda u: 1.0
    if isinstance(spec, (int, float)):
        c = float(spec)
        return lambda u: c
    if isinstance(spec, Mapping) and "u" in spec and "values" in spec:
        uu = np.asarray(spec["u"], dtype=float)
        vv = np.asarray(spec["values"], dtype=float)
        if uu.ndim != 1 or uu.shape != vv.shape or uu.size < 2 or np.any(np.diff(uu) <= 0):
            raise InvalidInputError("r table needs increasing 'u' knots and matching 'values'")
        return lambda u: np.interp(u, uu, vv)
    raise InvalidInputError("r weight must be a number or a table {'u': [...], 'values': [...]}")


def _weighted(h, H, dh, q, r, name, params, metadata) -> Nonlinearity:
    """f = q(k) h(y) r(u) together with its primitive and y-derivative."""
    qk, ru = _k_weight(q), _u_weight(r)
    return Nonlinearity(
        func=lambda k, y, u: qk(k) * h(y) * ru(u),
        primitive=lambda k, y, u: qk(k) * H(y) * ru(u),
        dfdy=lambda k, y, u: qk(k) * dh(y) * ru(u),
        name=name,
        params=params,
        metadata=metadata,
    )


def _linear(params):
    slope = float(params.get("slope", -1.0))
    u_coef = float(params.get("u_coef", 0.0))
    offset = float(params.get("offset", 0.0))
    return Nonlinearity(
        func=lambda k, y, u: slope * np.asarray(y, dtype=float) + u_coef * np.asarray(u, dtype=float) + offset,
        primitive=lambda k, y, u: 0.5 * slope * np.square(y) + (u_coef * np.asarray(u, dtype=float) + offset) * np.asarray(y, dtype=float),
        dfdy=lambda k, y, u: slope + 0.0 * np.asarray(y, dtype=float),
        name="linear",
        params={"slope": slope, "u_coef": u_coef, "offset": offset},
        metadata={"growth": "linear"},
    )


def _constant_sign(params):
    c = float(params.get("value", 0.0))
    return Nonlinearity(
        func=lambda k, y, u: c + 0.0 * np.asarray(y, dtype=float),
        primitive=lambda k, y, u: c * np.asarray(y, dtype=float),
        dfdy=lambda k, y, u: 0.0 * np.asarray(y, dtype=float),
        name="constant_sign",
        params={"value": c},
        metadata={"growth": "bounded"},
    )


def example1_h(x, l):
    x = np.asarray(x, dtype=float)
    p = x ** (2 * l)
    return np.where(x <= 0, p, -p)


def example1_H(x, l):
    x = np.asarray(x, dtype=float)
    p = x ** (2 * l + 1) / (2 * l + 1)
    return np.where(x <= 0, p, -p)


def example1_dh(x, l):
    x = np.asarray(x, dtype=float)
    p = 2 * l * x ** (2 * l - 1)
    return np.where(x <= 0, p, -p)


def _example1(params):
    if "l" not in params:
        raise InvalidInputError("example1: missing parameter 'l'")
    l = params["l"]
    if int(l) != l or l < 1:
        raise InvalidInputError("example1: 'l' must be a positive integer")
    l = int(l)
    return _weighted(
        lambda x: example1_h(x, l),
        lambda x: example1_H(x, l),
        lambda x: example1_dh(x, l),
        params.get("q"),
        params.get("r"),
        "example1",
        {"l": l, **{key: params[key] for key in ("q", "r") if key in params}},
        {"growth": f"power {2 * l}", "a4": True},
    )


def example2_h(x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, -(x + 1.0) / (1.0 + x**4), -1.0)


def example2_quartic_integral(x):
    """Closed form of the integral of 1/(1 + t^4) over [0, x]."""
    x = np.asarray(x, dtype=float)
    return (
        SQRT2 / 8.0 * np.log((x * x + x * SQRT2 + 1.0) / (x * x - x * SQRT2 + 1.0))
        + SQRT2 / 4.0 * np.arctan(x * SQRT2 + 1.0)
        + SQRT2 / 4.0 * np.arctan(x * SQRT2 - 1.0)
    )


def example2_H(x):
    """Primitive of :func:`example2_h` vanishing at 0.

    For x < 0 the integrand splits as -t/(1+t^4) - 1/(1+t^4); the first part
    integrates to -arctan(x^2)/2, the second to minus the quartic integral.
    """
    x = np.asarray(x, dtype=float)
    neg = -0.5 * np.arctan(x * x) - example2_quartic_integral(x)
    return np.where(x < 0, neg, -x) + 0.0  # no signed zero at the origin


def example2_dh(x):
    x = np.asarray(x, dtype=float)
    x3 = x**3
    d = -(1.0 - 3.0 * x3 * x - 4.0 * x3) / (1.0 + x3 * x) ** 2
    return np.where(x < 0, d, 0.0)


def _example2(params):
    return _weighted(
        example2_h,
        example2_H,
        example2_dh,
        params.get("q"),
        params.get("r"),
        "example2",
        {key: params[key] for key in ("q", "r") if key in params},
        {"growth": "bounded"},
    )


def _pl_integral(knots, vals, y):
    """Integral from knots[0] to y of the piecewise-linear interpolant,
    extended by constants outside the knots."""
    y = np.asarray(y, dtype=float)
    slopes = np.diff(vals) / np.diff(knots)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(knots))))
    i = np.clip(np.searchsorted(knots, y, side="right") - 1, 0, knots.size - 2)
    s = np.clip(y, knots[0], knots[-1]) - knots[i]
    inside = cum[i] + s * (vals[i] + 0.5 * slopes[i] * s)
    below = (y - knots[0]) * vals[0]
    above = cum[-1] + (y - knots[-1]) * vals[-1]
    return np.where(y < knots[0], below, np.where(y > knots[-1], above, inside))


def _table(params):
    for key in ("y", "values"):
        if key not in params:
            raise InvalidInputError(f"table: missing parameter {key!r}")
    knots = np.asarray(params["y"], dtype=float)
    vals = np.asarray(params["values"], dtype=float)
    if knots.ndim != 1 or knots.shape != vals.shape or knots.size < 2 or np.any(np.diff(knots) <= 0):
        raise InvalidInputError("table: 'y' must be increasing with at least two knots, matching 'values'")
    u_coef = float(params.get("u_coef", 0.0))
    qk = _k_weight(params.get("q"))
    slopes = np.diff(vals) / np.diff(knots)
    base = _pl_integral(knots, vals, 0.0)

    def dfdy(k, y, u):
        y = np.asarray(y, dtype=float)
        i = np.clip(np.searchsorted(knots, y, side="right") - 1, 0, knots.size - 2)
        inside = (y >= knots[0]) & (y <= knots[-1])
        return qk(k) * np.where(inside, slopes[i], 0.0)

    stored = {"y": knots.tolist(), "values": vals.tolist()}
    if "u_coef" in params:
        stored["u_coef"] = u_coef
    if "q" in params:
        stored["q"] = params["q"]
    return Nonlinearity(
        func=lambda k, y, u: qk(k) * np.interp(y, knots, vals) + u_coef * np.asarray(u, dtype=float),
        primitive=lambda k, y, u: qk(k) * (_pl_integral(knots, vals, y) - base)
        + u_coef * np.asarray(u, dtype=float) * np.asarray(y, dtype=float),
        dfdy=dfdy,
        name="table",
        params=stored,
        metadata={"growth": "bounded"},
    )


BUILTINS: dict[str, Callable[[Mapping], Nonlinearity]] = {
    "linear": _linear,
    "constant_sign": _constant_sign,
    "example1": _example1,
    "example2": _example2,
    "table": _table,
}


def builtin_nonlinearity(name: str, params: Mapping | None = None) -> Nonlinearity:
    """Build a registered nonlinearity.

    ``linear``         f = slope*y + u_coef*u + offset (defaults -1, 0, 0)
    ``constant_sign``  f = value
    ``example1``       f = q(k) h(y) r(u), h(y) = y^(2l) for y <= 0 and -y^(2l) for y > 0
    ``example2``       f = q(k) h(y) r(u), h(y) = -(y+1)/(1+y^4) for y < 0 and -1 for y >= 0
    ``table``          f = q(k) * interp(y; knots, values) + u_coef*u

    ``q`` is a number or a list over k = 1..T; ``r`` is a number or a table
    ``{"u": [...], "values": [...]}``. Both default to 1.
    """
    if name not in BUILTINS:
        raise InvalidInputError(f"unknown nonlinearity {name!r}; known: {sorted(BUILTINS)}")
    return BUILTINS[name](dict(params or {}))


# --------------------------------------------------------------------------
# parameter functions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ParameterFunction:
    """An element of L_M: values on k = 1..T with sup norm at most ``bound``."""

    values: np.ndarray
    bound: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size == 0:
            raise InvalidInputError("parameter function needs at least one value")
        if not self.bound > 0:
            raise InvalidInputError("parameter bound M must be positive")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("parameter function values must be finite")
        if np.max(np.abs(v)) > self.bound:
            raise InvalidInputError(
                f"parameter function has sup norm {np.max(np.abs(v))!r} > M = {self.bound!r}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "bound", float(self.bound))

    @classmethod
    def constant(cls, T: int, value: float, bound: float) -> ParameterFunction:
        return cls(np.full(T, float(value)), bound)

    @property
    def T(self) -> int:
        return self.values.size

    def sup_distance(self, other: ParameterFunction) -> float:
        return float(np.max(np.abs(self.values - other.values)))

    def __eq__(self, other):
        if not isinstance(other, ParameterFunction):
            return NotImplemented
        return self.bound == other.bound and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.bound, self.values.tobytes()))


def harmonic_schedule(count: int) -> list[float]:
    """1, 1/2, ..., 1/count."""
    return [1.0 / n for n in range(1, count + 1)]


def make_parameter_sequence(
    base: ParameterFunction,
    direction: Sequence[float],
    schedule: Sequence[float],
    count: int | None = None,
) -> list[ParameterFunction]:
    """
    Parameters ``u_n = base + schedule[n] * direction`` followed by ``base``.

    The returned list has ``count + 1`` entries, the last one being the limit.
    Values leaving ``[-M, M]`` are clipped and a warning is issued.
    """
    sched = [float(s) for s in schedule]
    if not sched:
        raise InvalidInputError("empty schedule")
    if count is None:
        count = len(sched)
    if count <= 0:
        raise InvalidInputError("count must be positive")
    if count > len(sched):
        raise InvalidInputError(f"schedule has {len(sched)} entries, {count} requested")
    sched = sched[:count]
    if any(s <= 0 for s in sched):
        raise InvalidInputError("schedule entries must be positive")
    if any(b > a for a, b in zip(sched, sched[1:])):
        raise InvalidInputError("schedule must be non-increasing")
    d = np.asarray(direction, dtype=float).ravel()
    if d.size == 1:
        d = np.full(base.T, d[0])
    if d.size != base.T:
        raise InvalidInputError(f"direction has {d.size} entries, expected {base.T}")

    M = base.bound
    seq = []
    for n, s in enumerate(sched, start=1):
        v = base.values + s * d
        if np.max(np.abs(v)) > M:
            warnings.warn(f"parameter u_{n} left L_M and was clipped to [-{M}, {M}]", stacklevel=2)
            v = np.clip(v, -M, M)
        seq.append(ParameterFunction(v, M))
    seq.append(base)
    return seq


# --------------------------------------------------------------------------
# problems
# --------------------------------------------------------------------------


def _vector(name, values, size):
    try:
        v = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{name}: expected a list of numbers") from exc
    if v.ndim != 1 or v.size != size:
        raise SchemaError(f"{name}: expected {size} entries, got {v.size if v.ndim == 1 else v.shape}")
    if not np.all(np.isfinite(v)):
        raise SchemaError(f"{name}: entries must be finite")
    v.setflags(write=False)
    return v


def _check_T(T):
    if isinstance(T, bool) or not isinstance(T, (int, np.integer)) or T < 1:
        raise SchemaError(f"T: expected a positive integer, got {T!r}")
    return int(T)


@dataclass(frozen=True, eq=False)
class DirichletProblem:
    """``p`` on k = 1..T+1, ``g`` on k = 1..T; ``alpha`` is the A2 threshold if known."""

    T: int
    p: np.ndarray
    g: np.ndarray
    f: Nonlinearity
    M_param: float
    alpha: float | None = None

    kind = "dirichlet"

    def __post_init__(self):
        T = _check_T(self.T)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "p", _vector("p", self.p, T + 1))
        object.__setattr__(self, "g", _vector("g", self.g, T))
        if not (isinstance(self.M_param, (int, float)) and self.M_param > 0):
            raise SchemaError("M: expected a positive number")
        object.__setattr__(self, "M_param", float(self.M_param))
        if self.alpha is not None:
            if not (isinstance(self.alpha, (int, float)) and self.alpha > 0):
                raise SchemaError("alpha: expected a positive number")
            object.__setattr__(self, "alpha", float(self.alpha))
        if not isinstance(self.f, Nonlinearity):
            raise SchemaError("f: expected a Nonlinearity")

    @property
    def m(self) -> float:
        """min of p over k = 1..T+1."""
        return float(np.min(self.p))

    def require_a3(self):
        if not self.m > 0:
            raise PreconditionError(f"A3 fails: min p = {self.m!r} is not positive")

    def __eq__(self, other):
        if not isinstance(other, DirichletProblem):
            return NotImplemented
        return problem_to_dict(self) == problem_to_dict(other)


@dataclass(frozen=True, eq=False)
class EmdenProblem:
    """``p`` on k = 0..T, ``q`` and ``g`` on k = 1..T; ``r`` is the A8 exponent."""

    T: int
    p: np.ndarray
    q: np.ndarray
    g: np.ndarray
    f: Nonlinearity
    M_param: float
    r: float = 1.5

    kind = "emden"

    def __post_init__(self):
        T = _check_T(self.T)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "p", _vector("p", self.p, T + 1))
        object.__setattr__(self, "q", _vector("q", self.q, T))
        object.__setattr__(self, "g", _vector("g", self.g, T))
        if not (isinstance(self.M_param, (int, float)) and self.M_param > 0):
            raise SchemaError("M: expected a positive number")
        object.__setattr__(self, "M_param", float(self.M_param))
        if not (isinstance(self.r, (int, float)) and 1.0 < self.r < 2.0):
            raise SchemaError(f"r: expected a number strictly inside (1, 2), got {self.r!r}")
        object.__setattr__(self, "r", float(self.r))
        if not isinstance(self.f, Nonlinearity):
            raise SchemaError("f: expected a Nonlinearity")

    def has_nonzero_g(self) -> bool:
        return bool(np.any(self.g != 0.0))

    def __eq__(self, other):
        if not isinstance(other, EmdenProblem):
            return NotImplemented
        return problem_to_dict(self) == problem_to_dict(other)


Problem = Union[DirichletProblem, EmdenProblem]


def problem_to_dict(prob: Problem) -> dict:
    doc = {"kind": prob.kind, "T": prob.T, "p": prob.p.tolist()}
    if isinstance(prob, EmdenProblem):
        doc["q"] = prob.q.tolist()
    doc["g"] = prob.g.tolist()
    doc["f"] = prob.f.to_dict()
    doc["M"] = prob.M_param
    if isinstance(prob, DirichletProblem):
        if prob.alpha is not None:
            doc["alpha"] = prob.alpha
    else:
        doc["r"] = prob.r
    return doc


def problem_from_dict(doc: Mapping) -> Problem:
    if not isinstance(doc, Mapping):
        raise SchemaError("problem document must be a JSON object")
    kind = doc.get("kind")
    if kind not in ("dirichlet", "emden"):
        raise SchemaError(f"kind: expected 'dirichlet' or 'emden', got {kind!r}")
    for key in ("T", "p", "g", "f", "M"):
        if key not in doc:
            raise SchemaError(f"{key}: missing field")
    fdoc = doc["f"]
    if not isinstance(fdoc, Mapping) or "name" not in fdoc:
        raise SchemaError("f: expected an object with 'name' and optional 'params'")
    try:
        f = builtin_nonlinearity(fdoc["name"], fdoc.get("params") or {})
    except InvalidInputError as exc:
        raise SchemaError(f"f: {exc}") from exc
    T = _check_T(doc["T"])
    if kind == "dirichlet":
        if doc.get("q"):
            raise SchemaError("q: not used by dirichlet problems")
        return DirichletProblem(T=T, p=doc["p"], g=doc["g"], f=f, M_param=doc["M"], alpha=doc.get("alpha"))
    if "q" not in doc:
        raise SchemaError("q: missing field")
    return EmdenProblem(T=T, p=doc["p"], q=doc["q"], g=doc["g"], f=f, M_param=doc["M"], r=doc.get("r", 1.5))


def load_problem(path) -> Problem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"problem file {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"problem file {path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return problem_from_dict(doc)


def save_problem(prob: Problem, path) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(prob), indent=2) + "\n")


# --------------------------------------------------------------------------
# bundled examples
# --------------------------------------------------------------------------


def bundled_problems() -> dict[str, Problem]:
    """The example problems shipped with the package."""
    r_table = {"u": [-1.0, 1.0], "values": [0.5, 1.5]}
    T = 10
    return {
        "linear": DirichletProblem(
            T=T,
            p=[1.0 + 0.1 * k for k in range(1, T + 2)],
            g=[0.5 * (-1) ** k + 0.1 * k for k in range(1, T + 1)],
            f=builtin_nonlinearity("linear", {"slope": -1.0, "u_coef": 1.0}),
            M_param=2.0,
            alpha=2.0,
        ),
        "parabola": DirichletProblem(
            T=3,
            p=[1.0] * 4,
            g=[-1.0] * 3,
            f=builtin_nonlinearity("constant_sign", {"value": 0.0}),
            M_param=1.0,
            alpha=1.0,
        ),
        "example1": DirichletProblem(
            T=5,
            p=[1.0] * 6,
            g=[0.5, -0.25, 1.0, 0.0, -0.75],
            f=builtin_nonlinearity("example1", {"l": 1}),
            M_param=1.0,
            alpha=1.0,
        ),
        "example2": DirichletProblem(
            T=8,
            p=[1.0] * 9,
            g=[-2.0] * 8,
            f=builtin_nonlinearity("example2", {"r": r_table}),
            M_param=1.0,
            alpha=1.0,
        ),
        "example2_emden": EmdenProblem(
            T=6,
            p=[1.0] * 7,
            q=[-1.0] * 6,
            g=[-1.5, -0.5, 0.25, -2.0, 1.0, -1.0],
            f=builtin_nonlinearity("example2", {"r": r_table}),
            M_param=1.0,
            r=1.5,
        ),
        "linear_emden": EmdenProblem(
            T=5,
            p=[1.0, 2.0, 1.5, 1.0, 0.5, 1.0],
            q=[-0.5] * 5,
            g=[1.0, 0.0, -1.0, 0.5, 0.0],
            f=builtin_nonlinearity("linear", {"slope": -1.0, "u_coef": 0.5}),
            M_param=1.0,
            r=1.5,
        ),
    }


def write_bundle(directory) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, prob in bundled_problems().items():
        path = out / f"{name}.json"
        save_problem(prob, path)
        paths.append(path)
    return paths
