"""AST for the decision-program DSL.

Everything numeric is a linear form over named variables; guards are and/or
trees of atoms normalized to `linear-form REL 0`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Union


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NO_POS = Pos(0, 0)


class Relation(Enum):
    LE = "<="
    LT = "<"
    GE = ">="
    GT = ">"
    EQ = "=="

    def flipped(self) -> "Relation":
        """Relation of the pointwise negation (boundaries have measure zero).

        EQ has no atomic negation; callers must expand it to LT or GT.
        """
        if self is Relation.LE:
            return Relation.GT
        if self is Relation.LT:
            return Relation.GE
        if self is Relation.GE:
            return Relation.LT
        if self is Relation.GT:
            return Relation.LE
        raise ValueError("negation of == is not a single atom")


@dataclass(frozen=True)
class LinearExpression:
    """sum_v terms[v]*v + const.  Coefficients and constant are finite floats;
    each variable appears at most once."""

    terms: tuple[tuple[str, float], ...]
    const: float = 0.0

    def __post_init__(self) -> None:
        seen = set()
        for name, coef in self.terms:
            if not name:
                raise ValueError("empty variable name in linear expression")
            if name in seen:
                raise ValueError(f"variable {name!r} appears twice")
            seen.add(name)
            if not math.isfinite(coef):
                raise ValueError(f"non-finite coefficient for {name!r}")
        if not math.isfinite(self.const):
            raise ValueError("non-finite constant in linear expression")

    @staticmethod
    def constant(value: float) -> "LinearExpression":
        return LinearExpression((), value)

    @staticmethod
    def variable(name: str) -> "LinearExpression":
        return LinearExpression(((name, 1.0),), 0.0)

    @staticmethod
    def of(terms: Mapping[str, float], const: float = 0.0) -> "LinearExpression":
        return LinearExpression(tuple(terms.items()), const)

    def coefficients(self) -> dict[str, float]:
        return dict(self.terms)

    def variables(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.terms)

    def plus(self, other: "LinearExpression") -> "LinearExpression":
        acc = dict(self.terms)
        for name, coef in other.terms:
            acc[name] = acc.get(name, 0.0) + coef
        return LinearExpression(tuple(acc.items()), self.const + other.const)

    def minus(self, other: "LinearExpression") -> "LinearExpression":
        return self.plus(other.scaled(-1.0))

    def scaled(self, k: float) -> "LinearExpression":
        return LinearExpression(
            tuple((name, coef * k) for name, coef in self.terms), self.const * k
        )

    def substitute(self, env: Mapping[str, "LinearExpression"]) -> "LinearExpression":
        """Replace every variable by its binding (a linear form), flattening
        to a linear form over the bindings' variables."""
        acc = LinearExpression.constant(self.const)
        for name, coef in self.terms:
            acc = acc.plus(env[name].scaled(coef))
        return acc

    def evaluate(self, values: Mapping[str, float]) -> float:
        return sum(coef * values[name] for name, coef in self.terms) + self.const


@dataclass(frozen=True)
class AtomicCondition:
    """lhs REL 0 (the parser moves every term to the left side)."""

    lhs: LinearExpression
    rel: Relation
    pos: Pos = NO_POS

    def key(self) -> tuple:
        # structural identity, ignoring source position
        return (tuple(sorted(self.lhs.terms)), self.lhs.const, self.rel)

    def holds(self, values: Mapping[str, float]) -> bool:
        v = self.lhs.evaluate(values)
        if self.rel is Relation.LE:
            return v <= 0.0
        if self.rel is Relation.LT:
            return v < 0.0
        if self.rel is Relation.GE:
            return v >= 0.0
        if self.rel is Relation.GT:
            return v > 0.0
        return v == 0.0


@dataclass(frozen=True)
class CondAtom:
    atom: AtomicCondition


@dataclass(frozen=True)
class CondAnd:
    items: tuple["Cond", ...]


@dataclass(frozen=True)
class CondOr:
    items: tuple["Cond", ...]


Cond = Union[CondAtom, CondAnd, CondOr]


def cond_atoms(cond: Cond) -> list[AtomicCondition]:
    if isinstance(cond, CondAtom):
        return [cond.atom]
    out: list[AtomicCondition] = []
    for item in cond.items:
        out.extend(cond_atoms(item))
    return out


def cond_holds(cond: Cond, values: Mapping[str, float]) -> bool:
    if isinstance(cond, CondAtom):
        return cond.atom.holds(values)
    if isinstance(cond, CondAnd):
        return all(cond_holds(c, values) for c in cond.items)
    return any(cond_holds(c, values) for c in cond.items)


@dataclass(frozen=True)
class Gauss:
    mean: float
    stddev: float


@dataclass(frozen=True)
class Bernoulli:
    p: float


Dist = Union[Gauss, Bernoulli]


@dataclass(frozen=True)
class Assign:
    target: str
    value: Union[LinearExpression, bool]  # bool literals per the listings
    pos: Pos = NO_POS


@dataclass(frozen=True)
class Draw:
    target: str
    dist: Dist
    pos: Pos = NO_POS


@dataclass(frozen=True)
class IfChain:
    branches: tuple[tuple[Cond, tuple["Statement", ...]], ...]
    else_body: tuple["Statement", ...]
    pos: Pos = NO_POS


Statement = Union[Assign, Draw, IfChain]


@dataclass(frozen=True)
class PopulationModel:
    name: str
    body: tuple[Statement, ...]
    returns: tuple[str, ...]
    pos: Pos = NO_POS


@dataclass(frozen=True)
class DecisionProgram:
    name: str
    params: tuple[str, ...]
    body: tuple[Statement, ...]
    return_value: Union[str, bool]
    pos: Pos = NO_POS


@dataclass(frozen=True)
class FairnessSpec:
    sensitive: Cond
    qualified: str
    epsilon: float
    pos: Pos = NO_POS


@dataclass(frozen=True)
class VerificationTask:
    model: PopulationModel
    program: DecisionProgram
    spec: FairnessSpec
    source: str = field(compare=False, default="")
