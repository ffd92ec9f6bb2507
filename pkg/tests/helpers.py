"""Random instance generators shared by the test modules."""

import numpy as np

from varbvp.grid import equivalence_constants
from varbvp.problems import DirichletProblem, EmdenProblem, Nonlinearity, ParameterFunction


def smooth_nonlinearity(a, b, c, e):
    """f = -a_k y + b_k u + c_k sin(y) + e_k with closed-form primitive and derivative."""
    a, b, c, e = (np.asarray(v, dtype=float) for v in (a, b, c, e))

    def at(v, k):
        return v[np.asarray(k, dtype=int) - 1]

    return Nonlinearity(
        func=lambda k, y, u: -at(a, k) * y + at(b, k) * u + at(c, k) * np.sin(y) + at(e, k),
        primitive=lambda k, y, u: -0.5 * at(a, k) * np.square(y) + (at(b, k) * u + at(e, k)) * y + at(c, k) * (1.0 - np.cos(y)),
        dfdy=lambda k, y, u: -at(a, k) + at(c, k) * np.cos(y),
    )


def random_dirichlet(rng, T, M=1.0, convex=True, analytic=True):
    """A random instance satisfying A1-A3 together with its A2 threshold.

    With ``convex`` the sine amplitude stays below a_k + m*gamma^2, which keeps
    the action strictly convex.
    """
    p = rng.uniform(0.5, 2.0, T + 1)
    m = p.min()
    gamma, _ = equivalence_constants(T)
    a = rng.uniform(0.2, 2.0, T)
    cap = a + m * gamma**2 if convex else 3.0 * a + 2.0
    c = rng.uniform(-1.0, 1.0, T) * 0.9 * cap
    b = rng.uniform(-1.0, 1.0, T)
    e = rng.uniform(-1.0, 1.0, T)
    g = rng.uniform(-2.0, 2.0, T)
    alpha = float(np.max((np.abs(b) * M + np.abs(c) + np.abs(e)) / a))
    f = smooth_nonlinearity(a, b, c, e)
    if not analytic:
        f = Nonlinearity(func=f.func)
    return DirichletProblem(T=T, p=p, g=g, f=f, M_param=M, alpha=alpha)


def random_emden(rng, T, M=1.0):
    p = rng.uniform(0.5, 2.0, T + 1)
    q = rng.uniform(-2.0, 0.5, T)
    a = rng.uniform(0.2, 2.0, T)
    f = smooth_nonlinearity(a, rng.uniform(-1, 1, T), rng.uniform(-1, 1, T), rng.uniform(-1, 1, T))
    return EmdenProblem(T=T, p=p, q=q, g=rng.uniform(-2, 2, T), f=f, M_param=M, r=1.5)


def random_parameter(rng, T, M=1.0):
    return ParameterFunction(rng.uniform(-M, M, T), M)
