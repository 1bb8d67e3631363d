"""fuzzcalc: level-wise fuzzy arithmetic, calculus, and optimization.

Fuzzy numbers are stored as families of cut endpoints over a shared
membership-level grid.  On top of that representation the package
provides exact interval arithmetic, forward-mode differentiation of
expression trees with an endpoint-ordering verdict, a stationary-point
solver with second-order and brute-force checks, and a small expression
language with a command-line front end.
"""

from .core import (
    AlphaGrid,
    DEFAULT_LEVELS,
    FuzzyNumber,
    Interval,
    NEST_TOL,
    ShapeFn,
    ValidityReport,
    add,
    alpha_cut,
    crisp,
    default_grid,
    distance,
    make_gaussian,
    make_lr,
    make_trapezoidal,
    make_triangular,
    mul,
    scalar_mul,
    sub,
    validate,
)
from .errors import (
    EvaluationError,
    FuzzyCalcError,
    InvalidParameterError,
    NotDifferentiableError,
    RangeError,
    ShapeFunctionError,
    UnsupportedFamilyError,
)
from .family import (
    CustomFamily,
    Family,
    GaussianFamily,
    LRFamily,
    TrapezoidalFamily,
    TriangularFamily,
    endpoint_derivatives,
    endpoints,
    family_from_dict,
    family_to_dict,
    instantiate,
)
from .expr import (
    Add,
    CrispConst,
    Exp,
    Expr,
    FuzzyConst,
    Mul,
    Neg,
    ParseError,
    ScalarMul,
    Span,
    Sub,
    Var,
    enumerate_nodes,
    fold_constants,
    parse,
)
from .expr import format as format_expr
from .calculus import (
    BranchEvent,
    ContinuityReport,
    DerivativeResult,
    DiffStatus,
    FDReport,
    Verdict,
    continuity_probe,
    derivative,
    differentiability_check,
    eval_fuzzy,
    eval_levels,
    screen_verdicts,
    second_derivative,
)
from .optimize import (
    BruteCheck,
    Dominance,
    Problem,
    SolveReport,
    SolverConfig,
    StationaryPoint,
    StationaryWitness,
    Sufficiency,
    SufficiencyResult,
    dominates,
    find_stationary,
    open_ball_contains,
    solve,
    stationarity_residuals,
    sufficiency_check,
    verify_nondominated,
)
from ._backend import backend_name

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "AlphaGrid",
    "DEFAULT_LEVELS",
    "FuzzyNumber",
    "Interval",
    "NEST_TOL",
    "ShapeFn",
    "ValidityReport",
    "add",
    "alpha_cut",
    "crisp",
    "default_grid",
    "distance",
    "make_gaussian",
    "make_lr",
    "make_trapezoidal",
    "make_triangular",
    "mul",
    "scalar_mul",
    "sub",
    "validate",
    # errors
    "EvaluationError",
    "FuzzyCalcError",
    "InvalidParameterError",
    "NotDifferentiableError",
    "ParseError",
    "RangeError",
    "ShapeFunctionError",
    "UnsupportedFamilyError",
    # families
    "CustomFamily",
    "Family",
    "GaussianFamily",
    "LRFamily",
    "TrapezoidalFamily",
    "TriangularFamily",
    "endpoint_derivatives",
    "endpoints",
    "family_from_dict",
    "family_to_dict",
    "instantiate",
    # expressions
    "Add",
    "CrispConst",
    "Exp",
    "Expr",
    "FuzzyConst",
    "Mul",
    "Neg",
    "ScalarMul",
    "Span",
    "Sub",
    "Var",
    "enumerate_nodes",
    "fold_constants",
    "format_expr",
    "parse",
    # calculus
    "BranchEvent",
    "ContinuityReport",
    "DerivativeResult",
    "DiffStatus",
    "FDReport",
    "Verdict",
    "continuity_probe",
    "derivative",
    "differentiability_check",
    "eval_fuzzy",
    "eval_levels",
    "screen_verdicts",
    "second_derivative",
    # optimization
    "BruteCheck",
    "Dominance",
    "Problem",
    "SolveReport",
    "SolverConfig",
    "StationaryPoint",
    "StationaryWitness",
    "Sufficiency",
    "SufficiencyResult",
    "dominates",
    "find_stationary",
    "open_ball_contains",
    "solve",
    "stationarity_residuals",
    "sufficiency_check",
    "verify_nondominated",
    # backend
    "backend_name",
]
