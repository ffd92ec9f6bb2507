"""
Command-line front end.

    varbvp solve|sweep|validate|spectrum|oracle --problem FILE [--param SPEC]
           [--tol TOL] [--max-iter N] [--seed S] --out DIR
    varbvp bundle --out DIR

``--param`` is a number (constant parameter), or ``@FILE`` naming a JSON
document: a list of T values, or for ``sweep`` an object
``{"base": ..., "direction": ..., "schedule": [...] | "harmonic", "count": N}``
where ``base`` and ``direction`` are numbers or lists.

Exit status: 0 success, 1 validation failure, 2 solver non-convergence,
3 I/O or schema error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import analysis
from .emden import build_matrices
from .errors import (
    ContinuationError,
    DivergenceError,
    InvalidInputError,
    PreconditionError,
    SchemaError,
    UnsupportedSizeError,
)
from .linalg import eigvalsh_tridiagonal
from .problems import (
    DirichletProblem,
    ParameterFunction,
    harmonic_schedule,
    load_problem,
    make_parameter_sequence,
    write_bundle,
)
from .solver import minimize, oracle_minimize, residual

EXIT_OK, EXIT_VALIDATION, EXIT_NONCONVERGED, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("varbvp")
fmt = analysis.fmt


class CLIError(Exception):
    def __init__(self, message, status):
        super().__init__(message)
        self.status = status


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, doc):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _read_param_doc(spec: str):
    path = Path(spec[1:] if spec.startswith("@") else spec)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise CLIError(f"--param: cannot read {path}: {exc.strerror or exc}", EXIT_IO) from exc
    except json.JSONDecodeError as exc:
        raise CLIError(f"--param: {path} is not valid JSON ({exc.msg})", EXIT_IO) from exc


def _vector_param(value, T, name):
    arr = np.asarray(value, dtype=float).ravel()
    if arr.size == 1:
        arr = np.full(T, arr[0])
    if arr.size != T:
        raise CLIError(f"--param: {name} has {arr.size} values, expected T = {T}", EXIT_IO)
    return arr


def _parameter(spec: str | None, prob) -> ParameterFunction:
    if spec is None:
        values = np.zeros(prob.T)
    else:
        try:
            values = np.full(prob.T, float(spec))
        except ValueError:
            doc = _read_param_doc(spec)
            if isinstance(doc, dict):
                doc = doc.get("base", doc.get("values"))
            values = _vector_param(doc, prob.T, "parameter")
    try:
        return ParameterFunction(values, prob.M_param)
    except InvalidInputError as exc:
        raise CLIError(f"--param: {exc}", EXIT_VALIDATION) from exc


def _sequence(args, prob):
    base_values, direction, schedule, count = 0.0, args.direction, "harmonic", args.count
    if args.param is not None:
        try:
            base_values = float(args.param)
        except ValueError:
            doc = _read_param_doc(args.param)
            if isinstance(doc, dict):
                base_values = doc.get("base", 0.0)
                direction = doc.get("direction", direction)
                schedule = doc.get("schedule", schedule)
                count = doc.get("count", count)
            else:
                base_values = doc
    try:
        base = ParameterFunction(_vector_param(base_values, prob.T, "base"), prob.M_param)
    except InvalidInputError as exc:
        raise CLIError(f"--param: {exc}", EXIT_VALIDATION) from exc
    if schedule == "harmonic":
        schedule = harmonic_schedule(int(count))
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            seq = make_parameter_sequence(base, _vector_param(direction, prob.T, "direction"), schedule, int(count))
        for w in caught:
            log.warning("%s", w.message)
    except InvalidInputError as exc:
        raise CLIError(f"--param: {exc}", EXIT_IO) from exc
    return seq


def cmd_solve(args, prob, out: Path) -> int:
    u = _parameter(args.param, prob)
    rep = minimize(prob, u, tol=args.tol, max_iter=args.max_iter, allow_indefinite=args.allow_indefinite)
    res = residual(prob, rep.minimizer, u)
    doc = rep.to_dict()
    doc["parameter"] = u.values.tolist()
    _write_json(out / "solve.json", doc)
    x = rep.minimizer.values
    rows = []
    for k, xk in enumerate(x):
        r = fmt(res[k - 1]) if 1 <= k <= prob.T else ""
        rows.append([k, fmt(xk), r])
    _write_csv(out / "solution.csv", ["k", "x", "residual"], rows)
    print(f"solve: converged={rep.converged} iterations={rep.iterations} residual={rep.residual_inf_norm:.3e} objective={rep.objective:.17g}")
    return EXIT_OK if rep.converged else EXIT_NONCONVERGED


def cmd_sweep(args, prob, out: Path) -> int:
    seq = _sequence(args, prob)
    try:
        rep = analysis.continuation_run(prob, seq, warm_start=not args.cold, tol=args.tol, max_iter=args.max_iter)
    except ContinuationError as exc:
        (out / "sweep.csv").write_text(exc.report.csv_text())
        raise CLIError(f"sweep: {exc}", EXIT_NONCONVERGED) from exc
    (out / "sweep.csv").write_text(rep.csv_text())
    _write_json(out / "sweep.json", rep.summary())
    print(f"sweep: steps={len(rep.steps)} convergence_observed={rep.convergence_observed} limit_optimal={rep.limit_optimal}")
    return EXIT_OK


def cmd_validate(args, prob, out: Path) -> int:
    rep = analysis.validate_assumptions(prob, seed=args.seed)
    _write_json(out / "validate.json", rep.to_dict())
    for e in rep.entries:
        print(f"{e.id}: {e.status}")
    return EXIT_VALIDATION if rep.any_failed else EXIT_OK


def cmd_spectrum(args, prob, out: Path) -> int:
    if isinstance(prob, DirichletProblem):
        p = prob.p
        lam = eigvalsh_tridiagonal(p[:-1] + p[1:], -p[1:-1], indices=[0, prob.T - 1])
        lmin, lmax, matrix = float(lam[0]), float(lam[1]), "dirichlet_energy"
    else:
        mats = build_matrices(prob)
        lmin, lmax, matrix = mats.lambda_min, mats.lambda_max, "M+Q"
    verdict = "positive_definite" if lmin > 0 else "not_positive_definite"
    _write_csv(out / "spectrum.csv", ["matrix", "lambda_min", "lambda_max", "definiteness"], [[matrix, fmt(lmin), fmt(lmax), verdict]])
    print(f"{matrix}: lambda_min={lmin:.17g} lambda_max={lmax:.17g} {verdict}")
    return EXIT_OK


def cmd_oracle(args, prob, out: Path) -> int:
    u = _parameter(args.param, prob)
    radius = args.box_radius or analysis.oracle_box_radius(prob, u)
    orc = oracle_minimize(prob, u, radius, args.grid_points, tol=args.tol, allow_indefinite=args.allow_indefinite)
    sol = minimize(prob, u, tol=args.tol, max_iter=args.max_iter, allow_indefinite=args.allow_indefinite)
    header = ["method", "objective", "residual_inf_norm", "converged"] + [f"x{k}" for k in range(1, prob.T + 1)]
    rows = [
        [name, fmt(r.objective), fmt(r.residual_inf_norm), int(r.converged)] + [fmt(v) for v in r.minimizer.interior]
        for name, r in (("solver", sol), ("oracle", orc))
    ]
    _write_csv(out / "oracle.csv", header, rows)
    ok = sol.objective <= orc.objective + 1e-8
    print(f"oracle: solver={sol.objective:.17g} oracle={orc.objective:.17g} box_radius={radius:.6g} dominates={ok}")
    if not (sol.converged and orc.converged):
        return EXIT_NONCONVERGED
    return EXIT_OK if ok else EXIT_VALIDATION


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "spectrum": cmd_spectrum,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varbvp", description="Variational solver for discrete boundary value problems.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--problem", required=True, help="problem JSON file")
        sp.add_argument("--param", help="number, or @file.json")
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.add_argument("--max-iter", type=int, default=500)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--allow-indefinite", action="store_true", help="skip the coercivity gate")
        if name == "sweep":
            sp.add_argument("--direction", type=float, default=1.0)
            sp.add_argument("--count", type=int, default=20)
            sp.add_argument("--cold", action="store_true", help="start every solve from zero")
        if name == "oracle":
            sp.add_argument("--box-radius", type=float, default=None)
            sp.add_argument("--grid-points", type=int, default=41)
    bp = sub.add_parser("bundle", help="write the bundled example problems")
    bp.add_argument("--out", required=True)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CLIError(f"--out: cannot create {out}: {exc.strerror or exc}", EXIT_IO) from exc
        if args.command == "bundle":
            for path in write_bundle(out):
                print(path)
            return EXIT_OK
        prob = load_problem(args.problem)
        return COMMANDS[args.command](args, prob, out)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.status
    except SchemaError as exc:
        print(f"error: {args.problem}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PreconditionError, UnsupportedSizeError, InvalidInputError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DivergenceError as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def main():
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
