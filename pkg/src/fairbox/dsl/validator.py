"""Semantic validation: turns a parsed task into a ValidatedTask annotated
with the ordered draw sites (the base random vector), or raises
ValidationFailure carrying one diagnostic per violated rule."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .nodes import (
    Assign,
    AtomicCondition,
    Bernoulli,
    Cond,
    Dist,
    Draw,
    Gauss,
    IfChain,
    NO_POS,
    Pos,
    Relation,
    Statement,
    VerificationTask,
    cond_atoms,
)

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    pos: Pos = NO_POS

    def __str__(self) -> str:
        return f"{self.pos}: {self.severity}: {self.message}"


class ValidationFailure(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = tuple(diagnostics)
        super().__init__(
            "; ".join(str(d) for d in diagnostics if d.severity == ERROR)
        )


@dataclass(frozen=True)
class DrawSite:
    index: int  # position in the base random vector
    target: str
    dist: Dist
    base_name: str
    pos: Pos

    @property
    def is_gaussian(self) -> bool:
        return isinstance(self.dist, Gauss)


@dataclass(frozen=True)
class ValidatedTask:
    task: VerificationTask
    draw_sites: tuple[DrawSite, ...]
    warnings: tuple[Diagnostic, ...] = ()
    # keyed by the Draw node (positions make nodes unique)
    site_of: dict[Draw, DrawSite] = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        """Dimension of the base random vector (all draw sites)."""
        return len(self.draw_sites)

    @property
    def gaussian_sites(self) -> tuple[DrawSite, ...]:
        return tuple(s for s in self.draw_sites if s.is_gaussian)

    @property
    def bernoulli_sites(self) -> tuple[DrawSite, ...]:
        return tuple(s for s in self.draw_sites if not s.is_gaussian)

    @property
    def gaussian_dims(self) -> tuple[str, ...]:
        return tuple(s.base_name for s in self.gaussian_sites)


def iter_statements(body: tuple[Statement, ...]) -> Iterator[Statement]:
    """Pre-order, textual walk."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, IfChain):
            for _, branch in stmt.branches:
                yield from iter_statements(branch)
            yield from iter_statements(stmt.else_body)


def _collect_draw_sites(model_body: tuple[Statement, ...]) -> list[DrawSite]:
    draws = [s for s in iter_statements(model_body) if isinstance(s, Draw)]
    counts: dict[str, int] = {}
    for d in draws:
        counts[d.target] = counts.get(d.target, 0) + 1
    sites = []
    for idx, d in enumerate(draws):
        base = d.target if counts[d.target] == 1 else f"{d.target}@{idx}"
        sites.append(DrawSite(idx, d.target, d.dist, base, d.pos))
    return sites


# ---------------------------------------------------------------------------
# scope walking

REAL = "real"
BOOL = "bool"
CONFLICT = "conflict"


@dataclass
class _Scope:
    defined: set[str]
    types: dict[str, str]
    tainted: set[str]  # bernoulli-valued: usable only as v == 0 / v == 1

    def copy(self) -> "_Scope":
        return _Scope(set(self.defined), dict(self.types), set(self.tainted))


def _merge(parent: _Scope, branches: list[_Scope], has_else: bool) -> _Scope:
    scopes = branches if has_else else branches + [parent]
    defined = set.intersection(*(s.defined for s in scopes)) if scopes else set()
    types: dict[str, str] = {}
    tainted: set[str] = set()
    for s in scopes:
        tainted |= s.tainted & s.defined
    for name in defined:
        seen = {s.types[name] for s in scopes}
        types[name] = seen.pop() if len(seen) == 1 else CONFLICT
    return _Scope(defined, types, tainted)


class _Checker:
    def __init__(self, where: str, diags: list[Diagnostic], allow_draws: bool):
        self.where = where
        self.diags = diags
        self.allow_draws = allow_draws

    def error(self, message: str, pos: Pos) -> None:
        self.diags.append(Diagnostic(ERROR, f"{self.where}: {message}", pos))

    def warn(self, message: str, pos: Pos) -> None:
        self.diags.append(Diagnostic(WARNING, f"{self.where}: {message}", pos))

    def check_uses(self, names: tuple[str, ...], scope: _Scope, pos: Pos,
                   context: str) -> None:
        for name in names:
            if name not in scope.defined:
                self.error(f"variable {name!r} used before definition in {context}", pos)
            elif scope.types.get(name) == CONFLICT:
                self.error(f"variable {name!r} has inconsistent types across branches", pos)

    def check_arith_expr(self, expr, scope: _Scope, pos: Pos) -> None:
        names = expr.variables()
        self.check_uses(names, scope, pos, "expression")
        for name in names:
            if scope.types.get(name) == BOOL:
                self.error(f"boolean variable {name!r} used in arithmetic", pos)
            if name in scope.tainted:
                self.error(
                    f"bernoulli variable {name!r} used in arithmetic "
                    "(only v == 0 / v == 1 guards are allowed)", pos)

    def check_atom(self, atom: AtomicCondition, scope: _Scope) -> None:
        names = atom.lhs.variables()
        self.check_uses(names, scope, atom.pos, "condition")
        for name in names:
            if scope.types.get(name) == BOOL:
                self.error(f"boolean variable {name!r} used in a condition", atom.pos)
        tainted = [n for n in names if n in scope.tainted]
        if tainted:
            if not _is_bernoulli_literal(atom):
                self.error(
                    f"bernoulli variable {tainted[0]!r} may only appear in "
                    "guards of the form v == 1 or v == 0", atom.pos)
        elif atom.rel is Relation.EQ:
            self.warn(
                "equality over a continuous quantity is a probability-zero event",
                atom.pos)

    def check_cond(self, cond: Cond, scope: _Scope) -> None:
        for atom in cond_atoms(cond):
            self.check_atom(atom, scope)

    def walk_block(self, body: tuple[Statement, ...], scope: _Scope) -> _Scope:
        for stmt in body:
            if isinstance(stmt, Draw):
                if not self.allow_draws:
                    self.error("random draws are not allowed in the decision program",
                               stmt.pos)
                else:
                    self._check_dist(stmt)
                scope.defined.add(stmt.target)
                scope.types[stmt.target] = REAL
                if isinstance(stmt.dist, Bernoulli):
                    scope.tainted.add(stmt.target)
                else:
                    scope.tainted.discard(stmt.target)
            elif isinstance(stmt, Assign):
                if isinstance(stmt.value, bool):
                    scope.defined.add(stmt.target)
                    scope.types[stmt.target] = BOOL
                    scope.tainted.discard(stmt.target)
                else:
                    self.check_arith_expr(stmt.value, scope, stmt.pos)
                    scope.defined.add(stmt.target)
                    scope.types[stmt.target] = REAL
                    scope.tainted.discard(stmt.target)
            elif isinstance(stmt, IfChain):
                for guard, _ in stmt.branches:
                    self.check_cond(guard, scope)
                branch_scopes = []
                for _, branch in stmt.branches:
                    branch_scopes.append(self.walk_block(branch, scope.copy()))
                branch_scopes.append(self.walk_block(stmt.else_body, scope.copy()))
                merged = _merge(scope, branch_scopes, has_else=True)
                scope.defined, scope.types, scope.tainted = (
                    merged.defined, merged.types, merged.tainted)
            else:
                raise TypeError(f"unknown statement {stmt!r}")
        return scope

    def _check_dist(self, stmt: Draw) -> None:
        d = stmt.dist
        if isinstance(d, Gauss):
            if not d.stddev > 0:
                self.error(
                    f"degenerate distribution: gauss stddev must be positive, "
                    f"got {d.stddev}", stmt.pos)
        else:
            if not 0.0 <= d.p <= 1.0:
                self.error(f"bernoulli parameter must lie in [0, 1], got {d.p}",
                           stmt.pos)


def _is_bernoulli_literal(atom: AtomicCondition) -> bool:
    """Shape check for c*v + k == 0 meaning v == 0 or v == 1."""
    if atom.rel is not Relation.EQ or len(atom.lhs.terms) != 1:
        return False
    (_, c), = atom.lhs.terms
    k = atom.lhs.const
    sat0 = k == 0.0
    sat1 = c + k == 0.0
    return sat0 != sat1  # exactly one admissible value


def bernoulli_literal_bit(atom: AtomicCondition) -> int:
    """Which value of the (single) variable satisfies the atom: 0 or 1."""
    (_, c), = atom.lhs.terms
    return 0 if atom.lhs.const == 0.0 else 1


def validate(task: VerificationTask) -> ValidatedTask:
    diags: list[Diagnostic] = []
    model, program, spec = task.model, task.program, task.spec

    if len(set(program.params)) != len(program.params):
        diags.append(Diagnostic(
            ERROR, f"program {program.name!r} has duplicate parameters", program.pos))

    # model walk
    mc = _Checker(f"model {model.name!r}", diags, allow_draws=True)
    model_scope = mc.walk_block(model.body, _Scope(set(), {}, set()))
    for name in model.returns:
        if name not in model_scope.defined:
            diags.append(Diagnostic(
                ERROR, f"model returns {name!r} which is not defined on every path",
                model.pos))
        elif model_scope.types.get(name) == BOOL:
            diags.append(Diagnostic(
                ERROR, f"model returns boolean variable {name!r}", model.pos))

    # arity/name alignment
    if model.returns != program.params:
        diags.append(Diagnostic(
            ERROR,
            f"model returns ({', '.join(model.returns)}) but program takes "
            f"({', '.join(program.params)}); names and order must match",
            program.pos))

    # program walk; params inherit bernoulli restrictions through the returns
    prog_scope = _Scope(set(program.params),
                        {p: REAL for p in program.params},
                        set())
    for ret, param in zip(model.returns, program.params):
        if ret in model_scope.tainted:
            prog_scope.tainted.add(param)
    pc = _Checker(f"program {program.name!r}", diags, allow_draws=False)
    prog_scope = pc.walk_block(program.body, prog_scope)

    rv = program.return_value
    if isinstance(rv, str):
        if rv not in prog_scope.defined:
            diags.append(Diagnostic(
                ERROR, f"return variable {rv!r} is not defined on every path",
                program.pos))
        elif prog_scope.types.get(rv) != BOOL:
            diags.append(Diagnostic(
                ERROR, f"program must return a boolean; {rv!r} is not boolean "
                "on every path", program.pos))

    # spec block
    sc = _Checker("spec", diags, allow_draws=False)
    sc.check_cond(spec.sensitive, model_scope)
    if not 0.0 < spec.epsilon < 1.0:
        diags.append(Diagnostic(
            ERROR, f"epsilon must lie strictly between 0 and 1, got {spec.epsilon}",
            spec.pos))
    valid_names = {program.name} | ({rv} if isinstance(rv, str) else set())
    if spec.qualified not in valid_names:
        diags.append(Diagnostic(
            ERROR,
            f"qualified: {spec.qualified!r} names neither the program nor its "
            "return variable", spec.pos))

    sites = _collect_draw_sites(model.body)
    if not sites:
        diags.append(Diagnostic(
            ERROR, f"model {model.name!r} draws nothing; the population is "
            "deterministic", model.pos))

    errors = [d for d in diags if d.severity == ERROR]
    if errors:
        raise ValidationFailure(diags)

    draws = [s for s in iter_statements(model.body) if isinstance(s, Draw)]
    site_of = dict(zip(draws, sites))
    return ValidatedTask(
        task=task,
        draw_sites=tuple(sites),
        warnings=tuple(d for d in diags if d.severity == WARNING),
        site_of=site_of,
    )
