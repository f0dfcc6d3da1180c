"""Symbolic expressions over ultrafilter exponentiation, a rewriting prover,
and finite search for partition-regular configurations."""

from .expr import (
    AttrSet,
    CapExceeded,
    DEFAULT_CAP,
    EvalError,
    Exp1,
    Exp2,
    Lift,
    LiftFn,
    Nat,
    ParseError,
    Prod,
    Sum,
    UExpr,
    Var,
    attrs_of,
    eval_principal,
    format_expr,
    parse_equation,
    parse_expr,
    subexprs,
)
from .rewrite import (
    Equal,
    NotEqual,
    RuleLimitExceeded,
    UNKNOWN,
    Unknown,
    Verdict,
    find_refutation,
    normalize,
    prove_equal,
    replay_trace,
    rule_trace,
)

__version__ = "0.1.0"

__all__ = [
    "AttrSet",
    "CapExceeded",
    "DEFAULT_CAP",
    "Equal",
    "EvalError",
    "Exp1",
    "Exp2",
    "Lift",
    "LiftFn",
    "Nat",
    "NotEqual",
    "ParseError",
    "Prod",
    "RuleLimitExceeded",
    "Sum",
    "UExpr",
    "UNKNOWN",
    "Unknown",
    "Var",
    "Verdict",
    "attrs_of",
    "eval_principal",
    "find_refutation",
    "format_expr",
    "normalize",
    "parse_equation",
    "parse_expr",
    "prove_equal",
    "replay_trace",
    "rule_trace",
    "subexprs",
    "__version__",
]
