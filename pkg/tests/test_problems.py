import json
import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from varbvp.errors import InvalidInputError, SchemaError
from varbvp.problems import (
    DirichletProblem,
    EmdenProblem,
    ParameterFunction,
    builtin_nonlinearity,
    bundled_problems,
    example1_h,
    example1_H,
    example2_H,
    example2_h,
    example2_quartic_integral,
    harmonic_schedule,
    load_problem,
    make_parameter_sequence,
    problem_from_dict,
    problem_to_dict,
    save_problem,
)


class TestExample1:
    def test_values(self):
        assert example1_h(2.0, 1) == -4.0
        assert example1_h(-2.0, 1) == 4.0
        assert example1_H(0.0, 2) == 0.0

    @pytest.mark.parametrize("l", [1, 2, 3])
    def test_primitive_derivative(self, rng, l):
        y = rng.uniform(-2, 2, 100)
        h = 1e-6
        fd = (example1_H(y + h, l) - example1_H(y - h, l)) / (2 * h)
        np.testing.assert_allclose(fd, example1_h(y, l), atol=1e-6)

    def test_sign_identity(self, rng):
        # y * h(y) = -|y|^(2l+1) for every y
        y = rng.uniform(-5, 5, 200)
        np.testing.assert_allclose(y * example1_h(y, 2), -np.abs(y) ** 5, rtol=1e-12)

    def test_missing_l(self):
        with pytest.raises(InvalidInputError, match="l"):
            builtin_nonlinearity("example1", {})


class TestExample2:
    def test_H_at_zero_is_exactly_zero(self):
        assert example2_H(0.0) == 0.0
        assert example2_quartic_integral(0.0) == 0.0

    def test_derivative_at_minus_one(self):
        h = 1e-5
        fd = (example2_H(-1.0 + h) - example2_H(-1.0 - h)) / (2 * h)
        assert abs(fd - float(example2_h(-1.0))) <= 1e-6

    def test_primitive_matches_scipy(self, rng):
        for y in rng.uniform(-10, 10, 100):
            ref, _ = quad(lambda t: float(example2_h(t)), 0.0, y, points=[0.0] if y < 0 else None, epsabs=1e-13)
            assert float(example2_H(y)) == pytest.approx(ref, abs=1e-9)

    def test_quartic_integral_closed_form(self):
        for y in (-3.0, -0.5, 0.7, 4.0):
            ref, _ = quad(lambda t: 1.0 / (1.0 + t**4), 0.0, y, epsabs=1e-13)
            assert float(example2_quartic_integral(y)) == pytest.approx(ref, abs=1e-12)

    def test_bounded_below_by_minus_one(self):
        y = np.linspace(-50, 50, 2001)
        assert np.all(example2_h(y) >= -1.0 - 1e-15)


@pytest.mark.parametrize(
    "name, params",
    [
        ("linear", {"slope": -1.5, "u_coef": 0.3, "offset": 0.2}),
        ("constant_sign", {"value": -0.7}),
        ("example1", {"l": 2, "q": [1.0, 2.0, 0.5], "r": 1.5}),
        ("example2", {"q": 2.0, "r": {"u": [-1, 1], "values": [0.5, 1.5]}}),
        ("table", {"y": [-1.0, 0.0, 2.0], "values": [1.0, -1.0, 0.5], "u_coef": 0.4, "q": [1.0, 0.5, 2.0]}),
    ],
)
def test_builtin_primitive_and_derivative(rng, name, params):
    f = builtin_nonlinearity(name, params)
    assert float(f.primitive(1, 0.0, 0.3)) == 0.0
    for _ in range(100):
        k = int(rng.integers(1, 4))
        y, u = rng.uniform(-3, 3), rng.uniform(-1, 1)
        h = 1e-6
        fd = (f.primitive(k, y + h, u) - f.primitive(k, y - h, u)) / (2 * h)
        assert float(fd) == pytest.approx(float(f(k, y, u)), abs=1e-6)
        dfd = (f(k, y + h, u) - f(k, y - h, u)) / (2 * h)
        # tables have kinks; skip points straddling a knot
        if name == "table" and min(abs(y - t) for t in params["y"]) < 1e-5:
            continue
        assert float(f.dfdy(k, y, u)) == pytest.approx(float(dfd), abs=1e-5)


def test_unknown_builtin():
    with pytest.raises(InvalidInputError, match="unknown"):
        builtin_nonlinearity("cubic")


class TestParameterFunction:
    def test_bound_enforced(self):
        with pytest.raises(InvalidInputError, match="sup norm"):
            ParameterFunction([0.5, -1.5], 1.0)

    def test_constant(self):
        u = ParameterFunction.constant(4, 0.25, 1.0)
        assert u.T == 4 and np.all(u.values == 0.25)

    def test_harmonic(self):
        assert harmonic_schedule(3) == [1.0, 0.5, 1.0 / 3.0]

    def test_sequence_distances(self, rng):
        base = ParameterFunction(rng.uniform(-0.2, 0.2, 5), 1.0)
        d = rng.uniform(-0.5, 0.5, 5)
        seq = make_parameter_sequence(base, d, harmonic_schedule(10))
        assert len(seq) == 11 and seq[-1] == base
        for n, u in enumerate(seq[:-1], start=1):
            assert u.sup_distance(base) == pytest.approx(np.max(np.abs(d)) / n, rel=1e-12)

    def test_clipping_warns(self):
        base = ParameterFunction.constant(3, 0.9, 1.0)
        with pytest.warns(UserWarning, match="clipped"):
            seq = make_parameter_sequence(base, [1.0, 0.0, 0.0], [0.5, 0.05])
        assert seq[0].values[0] == 1.0
        assert np.max(np.abs(seq[1].values)) <= 1.0

    @pytest.mark.parametrize("schedule", [[], [1.0, -0.5], [0.5, 1.0]])
    def test_bad_schedule(self, schedule):
        with pytest.raises(InvalidInputError):
            make_parameter_sequence(ParameterFunction.constant(2, 0.0, 1.0), 1.0, schedule)

    def test_no_warning_inside(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            make_parameter_sequence(ParameterFunction.constant(2, 0.0, 1.0), 1.0, harmonic_schedule(5))


class TestSerialisation:
    @pytest.mark.parametrize("name", sorted(bundled_problems()))
    def test_round_trip(self, tmp_path, name):
        prob = bundled_problems()[name]
        save_problem(prob, tmp_path / "p.json")
        back = load_problem(tmp_path / "p.json")
        assert back == prob
        assert problem_to_dict(back) == json.loads((tmp_path / "p.json").read_text())

    def test_custom_not_serialisable(self, rng):
        from helpers import random_dirichlet

        with pytest.raises(SchemaError, match="f"):
            problem_to_dict(random_dirichlet(rng, 3))

    @pytest.mark.parametrize(
        "mutate, field",
        [
            (lambda d: d.update(p=d["p"][:-1]), "p"),
            (lambda d: d.update(p="abc"), "p"),
            (lambda d: d.update(T=0), "T"),
            (lambda d: d.update(M=-1), "M"),
            (lambda d: d.pop("g"), "g"),
            (lambda d: d.update(f={"name": "nope"}), "f"),
            (lambda d: d.update(kind="neumann"), "kind"),
        ],
    )
    def test_schema_errors_name_field(self, mutate, field):
        doc = problem_to_dict(bundled_problems()["linear"])
        mutate(doc)
        with pytest.raises(SchemaError, match=field):
            problem_from_dict(doc)

    def test_emden_r_range(self):
        doc = problem_to_dict(bundled_problems()["linear_emden"])
        doc["r"] = 2.0
        with pytest.raises(SchemaError, match="r"):
            problem_from_dict(doc)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(SchemaError, match="invalid JSON"):
            load_problem(path)


def test_problem_shapes():
    with pytest.raises(SchemaError, match="g"):
        DirichletProblem(T=3, p=[1.0] * 4, g=[0.0] * 2, f=builtin_nonlinearity("linear"), M_param=1.0)
    with pytest.raises(SchemaError, match="q"):
        EmdenProblem(T=3, p=[1.0] * 4, q=[0.0] * 4, g=[0.0] * 3, f=builtin_nonlinearity("linear"), M_param=1.0)
    prob = DirichletProblem(T=2, p=[2.0, 0.5, 3.0], g=[0, 0], f=builtin_nonlinearity("linear"), M_param=1.0)
    assert prob.m == 0.5
