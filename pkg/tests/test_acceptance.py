"""Acceptance suite: one recorded PASS/FAIL line per criterion."""

import subprocess
import sys
import time

import numpy as np
from helpers import random_dirichlet, random_emden, random_parameter

from varbvp.analysis import (
    FAILS,
    HOLDS_EMPIRICALLY,
    apriori_bound,
    continuation_run,
    oracle_box_radius,
    positivity_check,
    validate_assumptions,
)
from varbvp.emden import action_emden, build_matrices, nontriviality_check, residual_emden
from varbvp.functional import action_dirichlet, finite_difference_gradient, gradient_dirichlet, primitive_F
from varbvp.grid import GridFunction, equivalence_constants, norms
from varbvp.problems import (
    DirichletProblem,
    EmdenProblem,
    Nonlinearity,
    ParameterFunction,
    builtin_nonlinearity,
    bundled_problems,
    example2_H,
    harmonic_schedule,
    make_parameter_sequence,
    save_problem,
)
from varbvp.solver import minimize, oracle_minimize

ZERO_F = builtin_nonlinearity("constant_sign", {"value": 0.0})


def test_c01_gradient_consistency(criterion):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for i in range(100):
        T = int(rng.integers(3, 21))
        u = random_parameter(rng, T)
        z = rng.normal(size=T)
        if i < 50:
            prob = random_dirichlet(rng, T, convex=False)
            grad = gradient_dirichlet(prob, z, u)
            fd = finite_difference_gradient(lambda v: action_dirichlet(prob, v, u).value, z)
        else:
            prob = random_emden(rng, T)
            grad = -residual_emden(prob, z, u)
            fd = finite_difference_gradient(lambda v: action_emden(prob, v, u).value, z)
        worst = max(worst, np.max(np.abs(grad - fd)) / max(1.0, np.max(np.abs(grad))))
    elapsed = time.perf_counter() - start
    criterion(
        "criterion 1: gradient = -residual vs central FD (50 Dirichlet + 50 Emden)",
        worst <= 1e-6 and elapsed < 10.0,
        f"max rel err {worst:.2e}, {elapsed:.2f} s",
    )


def test_c02_critical_points(criterion):
    worst = 0.0
    ok = True
    for prob in bundled_problems().values():
        for c in (-0.5, 0.0, 0.5):
            rep = minimize(prob, ParameterFunction.constant(prob.T, c * prob.M_param, prob.M_param))
            ok &= rep.converged
            worst = max(worst, rep.residual_inf_norm)
    par = bundled_problems()["parabola"]
    x = minimize(par, ParameterFunction.constant(3, 0.0, 1.0)).minimizer
    exact = np.max(np.abs(x.interior - [1.5, 2.0, 1.5]))
    pos = positivity_check(x)
    criterion(
        "criterion 2: bundled solves are critical; parabola (1.5, 2, 1.5) and positive",
        ok and worst <= 1e-10 and exact <= 1e-12 and pos.positive,
        f"max residual {worst:.2e}, parabola error {exact:.1e}, min {pos.min_interior}",
    )


def test_c03_oracle_equivalence(criterion):
    rng = np.random.default_rng(3)
    gaps = []
    for _ in range(20):
        T = int(rng.integers(1, 4))
        prob = random_dirichlet(rng, T)
        u = random_parameter(rng, T)
        orc = oracle_minimize(prob, u, oracle_box_radius(prob, u))
        sol = minimize(prob, u)
        gaps.append(sol.objective - orc.objective)
    criterion(
        "criterion 3: solver objective <= oracle objective + 1e-8 (20 instances, T <= 3)",
        max(gaps) <= 1e-8,
        f"max(solver - oracle) = {max(gaps):.2e}",
    )


def test_c04_apriori_bound(criterion):
    rng = np.random.default_rng(4)
    slack = []
    for _ in range(20):
        T = int(rng.integers(3, 21))
        prob = random_dirichlet(rng, T, convex=False)
        u = random_parameter(rng, T)
        x = minimize(prob, u).minimizer
        slack.append(norms(x).energy - apriori_bound(prob, u).bound)
    criterion(
        "criterion 4: energy(minimizer) <= a-priori bound (20 instances)",
        max(slack) <= 1e-9,
        f"max(energy - bound) = {max(slack):.3g}",
    )


def test_c05_norm_equivalence(criterion):
    rng = np.random.default_rng(5)
    ok, attain = True, 0.0
    for T in (1, 3, 10, 50):
        g, g1 = equivalence_constants(T)
        for _ in range(1000):
            n = norms(GridFunction.dirichlet(rng.normal(size=T)))
            ok &= g * n.euclidean <= n.energy * (1 + 1e-12) and n.energy <= g1 * n.euclidean * (1 + 1e-12)
        k = np.arange(1, T + 1)
        for j, c in ((1, g), (T, g1)):
            n = norms(GridFunction.dirichlet(np.sin(j * k * np.pi / (T + 1))))
            attain = max(attain, abs(n.energy / n.euclidean - c))
    criterion(
        "criterion 5: gamma, gamma1 bracket 1000 random ratios and are attained (T = 1, 3, 10, 50)",
        ok and attain <= 1e-10,
        f"eigenvector attainment error {attain:.1e}",
    )


def test_c06_continuation(criterion):
    lin = bundled_problems()["linear"]
    base = ParameterFunction.constant(lin.T, 0.0, lin.M_param)
    rep = continuation_run(lin, make_parameter_sequence(base, 1.0, harmonic_schedule(50)))
    d = [s.distance_to_limit for s in rep.steps]
    decreasing = all(b < a for a, b in zip(d, d[1:]))

    ex2 = bundled_problems()["example2"]
    base2 = ParameterFunction.constant(ex2.T, 0.0, ex2.M_param)
    rep2 = continuation_run(ex2, make_parameter_sequence(base2, 1.0, harmonic_schedule(50)), warm_start=True)
    criterion(
        "criterion 6: linear distances decrease to <= 1e-8; example2 converges; limit optimal",
        decreasing and d[-1] <= 1e-8 and rep2.convergence_observed and rep.limit_optimal and rep2.limit_optimal,
        f"linear final {d[-1]:.1e} (n=50: {d[-2]:.3e}), example2 final {rep2.steps[-1].distance_to_limit:.1e}, "
        f"gaps {rep.limit_gap:.1e} / {rep2.limit_gap:.1e}",
    )


def test_c07_emden_identity(criterion):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        T = int(rng.integers(1, 21))
        prob, u = random_emden(rng, T), random_parameter(rng, T)
        z = rng.normal(size=T)
        mats = build_matrices(prob)
        ks = np.arange(1, T + 1)
        stencil = residual_emden(prob, z, u) - prob.f(ks, z, u.values) + prob.g
        worst = max(worst, np.max(np.abs((mats.M_mat + mats.Q_mat) @ z + stencil)))

    flat = lambda q, g, f=ZERO_F: EmdenProblem(T=3, p=[1.0] * 4, q=[q] * 3, g=g, f=f, M_param=1.0)
    eig = np.linalg.eigvalsh(build_matrices(flat(0.0, [0.0] * 3)).M_mat)
    a = build_matrices(flat(-1.0, [0.0] * 3)).a
    nontrivial = True
    for f in (ZERO_F, builtin_nonlinearity("linear", {"slope": -0.5, "u_coef": 0.3})):
        for _ in range(10):
            g = rng.uniform(-2, 2, 3) * (rng.uniform(size=3) < 0.5)
            g[rng.integers(3)] = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 2)
            prob = flat(-1.0, g.tolist(), f)
            u = ParameterFunction.constant(3, 0.0, 1.0)
            rep = minimize(prob, u)
            nontrivial &= rep.converged and nontriviality_check(prob, rep.minimizer, u).nontrivial
    criterion(
        "criterion 7: (M+Q)x = -stencil; spectrum {0,3,3}; a = 1; nontrivial solutions",
        worst <= 1e-12 and np.allclose(eig, [0, 3, 3], atol=1e-12) and abs(a - 1) <= 1e-12 and nontrivial,
        f"identity error {worst:.1e}, eigenvalues {np.round(eig, 12).tolist()}, a = {a:.15g}",
    )


def test_c08_example2_quadrature(criterion):
    f = builtin_nonlinearity("example2")
    bare = Nonlinearity(func=f.func)
    ys = np.random.default_rng(8).uniform(-10, 10, 100)
    err = max(abs(primitive_F(bare, 1, float(y), 0.0) - float(example2_H(y))) for y in ys)
    h0 = float(example2_H(0.0))
    criterion(
        "criterion 8: quadrature of h matches closed-form H at 100 points; H(0) = 0",
        err <= 1e-8 and h0 == 0.0,
        f"max error {err:.1e}, H(0) = {h0}",
    )


def test_c09a_example1_a2(criterion):
    rep = validate_assumptions(bundled_problems()["example1"], seed=0)
    entry = rep["A2"]
    criterion(
        "criterion 9a: example1 reported as failing A2 with a witness",
        entry.status == FAILS and bool(entry.witnesses),
        f"validator status {entry.status!r} (y*f = -|y|^3 <= 0 for every y)",
    )


def test_c09b_linear_a2(criterion):
    prob = DirichletProblem(T=5, p=[1.0] * 6, g=[0.0] * 5, f=builtin_nonlinearity("linear"), M_param=1.0, alpha=1.0)
    status = validate_assumptions(prob)["A2"].status
    criterion("criterion 9b: f = -y reported as satisfying A2", status == HOLDS_EMPIRICALLY, f"status {status!r}")


def test_c09c_bounded_a8(criterion):
    statuses = []
    for f in (builtin_nonlinearity("constant_sign", {"value": 1.0}), builtin_nonlinearity("example2")):
        prob = EmdenProblem(T=4, p=[1.0] * 5, q=[-1.0] * 4, g=[1.0, 0, 0, 0], f=f, M_param=1.0, r=1.5)
        statuses.append(validate_assumptions(prob)["A8"].status)
    criterion(
        "criterion 9c: bounded f reported as satisfying A8 empirically (r = 1.5)",
        all(s == HOLDS_EMPIRICALLY for s in statuses),
        f"statuses {statuses}",
    )


def test_c10_cli_determinism(criterion, tmp_path):
    save_problem(bundled_problems()["example2"], tmp_path / "example2.json")
    outputs = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        proc = subprocess.run(
            [sys.executable, "-m", "varbvp", "sweep", "--problem", str(tmp_path / "example2.json"),
             "--seed", "42", "--count", "20", "--out", str(out)],
            capture_output=True,
        )
        outputs.append((proc.returncode, (out / "sweep.csv").read_bytes()))
    criterion(
        "criterion 10: repeated CLI sweeps give byte-identical CSV",
        outputs[0][0] == 0 and outputs[0] == outputs[1],
        f"{len(outputs[0][1])} bytes",
    )
