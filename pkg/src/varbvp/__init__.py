"""Variational solver for parameter-dependent discrete second-order boundary value problems."""

from .analysis import (
    apriori_bound,
    continuation_run,
    emden_coercivity_bound,
    positivity_check,
    validate_assumptions,
)
from .emden import action_emden, build_matrices, nontriviality_check, residual_emden
from .functional import action_dirichlet, hessian_dirichlet, primitive_F, residual_dirichlet
from .grid import BCKind, GridFunction, equivalence_constants, forward_difference, norms
from .problems import (
    DirichletProblem,
    EmdenProblem,
    Nonlinearity,
    ParameterFunction,
    builtin_nonlinearity,
    bundled_problems,
    load_problem,
    make_parameter_sequence,
    save_problem,
)
from .solver import SolveReport, minimize, oracle_minimize, verify_critical_point

__version__ = "0.1.0"
