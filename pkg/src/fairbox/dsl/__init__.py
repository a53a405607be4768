from .nodes import (
    Assign,
    AtomicCondition,
    Bernoulli,
    Cond,
    CondAnd,
    CondAtom,
    CondOr,
    DecisionProgram,
    Draw,
    FairnessSpec,
    Gauss,
    IfChain,
    LinearExpression,
    PopulationModel,
    Pos,
    Relation,
    VerificationTask,
    cond_atoms,
    cond_holds,
)
from .parser import ParseError, parse_source, tokenize
from .printer import format_cond, format_atom, format_linexpr, format_task
from .validator import (
    Diagnostic,
    DrawSite,
    ValidatedTask,
    ValidationFailure,
    validate,
)

__all__ = [
    "Assign", "AtomicCondition", "Bernoulli", "Cond", "CondAnd", "CondAtom",
    "CondOr", "DecisionProgram", "Diagnostic", "Draw", "DrawSite",
    "FairnessSpec", "Gauss", "IfChain", "LinearExpression", "ParseError",
    "PopulationModel", "Pos", "Relation", "ValidatedTask", "ValidationFailure",
    "VerificationTask", "cond_atoms", "cond_holds", "format_atom",
    "format_cond", "format_linexpr", "format_task", "parse_source",
    "tokenize", "validate",
]
