"""Symbolic execution of the composed program (population model feeding the
decision program).

Every assignment is substituted into an environment of linear forms over the
base random vector; each execution path becomes a conjunction of linear atoms
over the Gaussian draws plus a set of Bernoulli branch choices.  Guards with
disjunctions are expanded into *disjoint* conjunctive alternatives (ordered
DNF with negated prefixes) so the returned paths are mutually exclusive up to
measure-zero boundaries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Union

from .dsl.nodes import (
    Assign,
    AtomicCondition,
    Bernoulli,
    Cond,
    CondAnd,
    CondAtom,
    Draw,
    IfChain,
    LinearExpression,
    Relation,
    Statement,
)
from .dsl.validator import ValidatedTask

DEFAULT_PATH_CAP = 2 ** 20
DEFAULT_DNF_CAP = 10_000

EVENTS = (
    "qualified_and_sensitive",
    "qualified_and_not_sensitive",
    "sensitive",
    "not_sensitive",
)

# (return-value filter or None, +1 for sensitive / -1 for its negation);
# the not_qualified events are not part of the fairness ratio but support
# partition checks
_EVENT_TABLE = {
    "qualified_and_sensitive": (True, +1),
    "qualified_and_not_sensitive": (True, -1),
    "sensitive": (None, +1),
    "not_sensitive": (None, -1),
    "not_qualified_and_sensitive": (False, +1),
    "not_qualified_and_not_sensitive": (False, -1),
}


class PathExplosion(Exception):
    """Path or DNF count exceeded the configured cap; the program is outside
    practical scope for exhaustive enumeration."""


@dataclass(frozen=True)
class BLit:
    """Bernoulli branch literal: draw site takes the given bit."""

    site: int
    bit: int


@dataclass(frozen=True)
class NAnd:
    items: tuple["Nnf", ...]


@dataclass(frozen=True)
class NOr:
    items: tuple["Nnf", ...]


Nnf = Union[bool, BLit, AtomicCondition, NAnd, NOr]


def neg(n: Nnf) -> Nnf:
    """Negation pushed to atoms; relations flip, == splits into < or >."""
    if isinstance(n, bool):
        return not n
    if isinstance(n, BLit):
        return BLit(n.site, 1 - n.bit)
    if isinstance(n, AtomicCondition):
        if n.rel is Relation.EQ:
            return NOr((
                AtomicCondition(n.lhs, Relation.LT, n.pos),
                AtomicCondition(n.lhs, Relation.GT, n.pos),
            ))
        return AtomicCondition(n.lhs, n.rel.flipped(), n.pos)
    if isinstance(n, NAnd):
        return NOr(tuple(neg(i) for i in n.items))
    return NAnd(tuple(neg(i) for i in n.items))


def _strip_zeros(e: LinearExpression) -> LinearExpression:
    if all(c != 0.0 for _, c in e.terms):
        return e
    return LinearExpression(
        tuple((n, c) for n, c in e.terms if c != 0.0), e.const
    )


@dataclass(frozen=True)
class PathCondition:
    constraints: tuple[AtomicCondition, ...]  # over Gaussian base variables
    bernoulli_choices: tuple[tuple[int, int], ...]  # (site index, bit)
    return_value: bool
    # the sensitive condition substituted at model exit on this path
    # (bookkeeping for event construction, not part of the path predicate)
    sensitive: Nnf = True


@dataclass(frozen=True)
class EventComponent:
    key: tuple[tuple[int, int], ...]  # (bernoulli site, bit) assignment
    weight: float
    region: tuple[tuple[AtomicCondition, ...], ...]  # disjunction of conjunctions


@dataclass(frozen=True)
class EventRegion:
    event: str
    dims: tuple[str, ...]  # Gaussian base variables, in draw order
    components: tuple[EventComponent, ...]


# ---------------------------------------------------------------------------
# condition substitution

class _Subst:
    def __init__(self, vtask: ValidatedTask):
        self.bern_sites = {
            s.base_name: s.index for s in vtask.bernoulli_sites
        }

    def atom(self, atom: AtomicCondition, env: Mapping[str, object]) -> Nnf:
        lhs = _strip_zeros(atom.lhs.substitute(env))
        names = lhs.variables()
        bern = [n for n in names if n in self.bern_sites]
        if bern:
            # validator enforced the v == 0 / v == 1 shape
            bit = 0 if lhs.const == 0.0 else 1
            return BLit(self.bern_sites[bern[0]], bit)
        if not names:
            return AtomicCondition(lhs, atom.rel).holds({})
        return AtomicCondition(lhs, atom.rel, atom.pos)

    def cond(self, c: Cond, env: Mapping[str, object]) -> Nnf:
        if isinstance(c, CondAtom):
            return self.atom(c.atom, env)
        if isinstance(c, CondAnd):
            return NAnd(tuple(self.cond(i, env) for i in c.items))
        return NOr(tuple(self.cond(i, env) for i in c.items))


# ---------------------------------------------------------------------------
# disjoint DNF

@dataclass(frozen=True)
class _Conj:
    atoms: tuple[AtomicCondition, ...]
    bits: tuple[tuple[int, int], ...]


_EMPTY_CONJ = _Conj((), ())


def _conj_merge(a: _Conj, b: _Conj) -> _Conj | None:
    bits = dict(a.bits)
    for site, bit in b.bits:
        if bits.setdefault(site, bit) != bit:
            return None  # contradictory Bernoulli requirements
    seen = {atom.key() for atom in a.atoms}
    atoms = list(a.atoms)
    for atom in b.atoms:
        if atom.key() not in seen:
            seen.add(atom.key())
            atoms.append(atom)
    return _Conj(tuple(atoms), tuple(sorted(bits.items())))


def ddnf(n: Nnf, cap: int = DEFAULT_DNF_CAP) -> list[_Conj]:
    """Disjoint DNF: the returned conjunctions cover exactly the points of n
    and are pairwise disjoint up to atom boundaries."""
    if isinstance(n, bool):
        return [_EMPTY_CONJ] if n else []
    if isinstance(n, BLit):
        return [_Conj((), ((n.site, n.bit),))]
    if isinstance(n, AtomicCondition):
        return [_Conj((n,), ())]
    if isinstance(n, NAnd):
        acc = [_EMPTY_CONJ]
        for item in n.items:
            part = ddnf(item, cap)
            acc = [
                merged
                for a in acc
                for b in part
                if (merged := _conj_merge(a, b)) is not None
            ]
            if len(acc) > cap:
                raise PathExplosion(
                    f"DNF expansion exceeded {cap} conjuncts")
        return acc
    # NOr: item_i contributes item_i minus everything before it
    acc: list[_Conj] = []
    prefix: list[Nnf] = []
    for item in n.items:
        acc.extend(ddnf(NAnd(tuple(prefix) + (item,)), cap))
        if len(acc) > cap:
            raise PathExplosion(f"DNF expansion exceeded {cap} conjuncts")
        prefix.append(neg(item))
    return acc


# ---------------------------------------------------------------------------
# path enumeration

def enumerate_paths(
    vtask: ValidatedTask,
    max_paths: int = DEFAULT_PATH_CAP,
    dnf_cap: int = DEFAULT_DNF_CAP,
) -> list[PathCondition]:
    """All execution paths of the composition, as disjoint conjunctions.

    Exhaustive (per Bernoulli assignment the constraint sets cover R^n up to
    boundaries) and mutually exclusive up to measure-zero overlap.
    """
    task = vtask.task
    model, program, spec = task.model, task.program, task.spec
    subst = _Subst(vtask)
    out: list[PathCondition] = []

    Env = dict[str, object]

    def exec_block(stmts: tuple[Statement, ...], env: Env, items: list[Nnf],
                   k: Callable[[Env, list[Nnf]], None]) -> None:
        if not stmts:
            k(env, items)
            return
        s, rest = stmts[0], stmts[1:]
        tail: Callable[[Env, list[Nnf]], None] = (
            lambda e, i: exec_block(rest, e, i, k)
        )
        if isinstance(s, Assign):
            if isinstance(s.value, bool):
                value: object = s.value
            else:
                value = _strip_zeros(s.value.substitute(env))
            tail({**env, s.target: value}, items)
        elif isinstance(s, Draw):
            site = vtask.site_of[s]
            tail({**env, s.target: LinearExpression.variable(site.base_name)},
                 items)
        elif isinstance(s, IfChain):
            negs: list[Nnf] = []
            for guard, body in s.branches:
                g = subst.cond(guard, env)
                exec_block(body, env, items + negs + [g], tail)
                negs.append(neg(g))
            exec_block(s.else_body, env, items + negs, tail)
        else:
            raise TypeError(f"unknown statement {s!r}")

    def after_model(env_m: Env, items: list[Nnf]) -> None:
        sens = subst.cond(spec.sensitive, env_m)
        env_p: Env = {
            param: env_m[ret]
            for ret, param in zip(model.returns, program.params)
        }
        exec_block(program.body, env_p, items,
                   lambda e, i: finish(e, i, sens))

    def finish(env_p: Env, items: list[Nnf], sens: Nnf) -> None:
        rv = program.return_value
        ret = rv if isinstance(rv, bool) else env_p[rv]
        assert isinstance(ret, bool)
        for conj in ddnf(NAnd(tuple(items)), dnf_cap):
            out.append(PathCondition(conj.atoms, conj.bits, ret, sens))
            if len(out) > max_paths:
                raise PathExplosion(
                    f"path count exceeded {max_paths}")

    exec_block(model.body, {}, [], after_model)
    return out


# ---------------------------------------------------------------------------
# event regions

def _nnf_blit_sites(n: Nnf, acc: set[int]) -> None:
    if isinstance(n, BLit):
        acc.add(n.site)
    elif isinstance(n, (NAnd, NOr)):
        for item in n.items:
            _nnf_blit_sites(item, acc)


def _resolve_bits(n: Nnf, bits: Mapping[int, int]) -> Nnf:
    """Evaluate Bernoulli literals under a full assignment, folding constants."""
    if isinstance(n, BLit):
        return bits[n.site] == n.bit
    if isinstance(n, NAnd):
        items = []
        for item in n.items:
            r = _resolve_bits(item, bits)
            if r is False:
                return False
            if r is not True:
                items.append(r)
        if not items:
            return True
        return items[0] if len(items) == 1 else NAnd(tuple(items))
    if isinstance(n, NOr):
        items = []
        for item in n.items:
            r = _resolve_bits(item, bits)
            if r is True:
                return True
            if r is not False:
                items.append(r)
        if not items:
            return False
        return items[0] if len(items) == 1 else NOr(tuple(items))
    return n


def relevant_bernoulli_sites(paths: list[PathCondition]) -> tuple[int, ...]:
    """Sites that actually influence any path choice or the sensitive
    condition; the rest marginalize out exactly."""
    sites: set[int] = set()
    for p in paths:
        for site, _ in p.bernoulli_choices:
            sites.add(site)
        _nnf_blit_sites(p.sensitive, sites)
    return tuple(sorted(sites))


def build_event_region(
    paths: list[PathCondition],
    event: str,
    vtask: ValidatedTask,
    dnf_cap: int = DEFAULT_DNF_CAP,
    max_components: int = DEFAULT_PATH_CAP,
) -> EventRegion:
    """Region of the base random vector where the event holds, one region per
    assignment of the relevant Bernoulli sites."""
    want, sense = _EVENT_TABLE[event]
    sites = relevant_bernoulli_sites(paths)
    if sites and 2 ** len(sites) > max_components:
        raise PathExplosion(
            f"{2 ** len(sites)} Bernoulli components exceed the cap")
    site_p = {s.index: s.dist.p for s in vtask.bernoulli_sites
              if isinstance(s.dist, Bernoulli)}

    # marginal events over a path-independent sensitive condition reduce to
    # the condition itself (path constraints cover R^n per component)
    uniform_sens = None
    if want is None and paths:
        forms = {_nnf_key(p.sensitive) for p in paths}
        if len(forms) == 1:
            uniform_sens = paths[0].sensitive

    components = []
    for assignment in itertools.product((0, 1), repeat=len(sites)):
        bits = dict(zip(sites, assignment))
        weight = 1.0
        for site, bit in bits.items():
            p = site_p[site]
            weight *= p if bit else 1.0 - p
        disjuncts: list[tuple[AtomicCondition, ...]] = []
        if uniform_sens is not None:
            base = uniform_sens if sense > 0 else neg(uniform_sens)
            for conj in ddnf(_resolve_bits(base, bits), dnf_cap):
                disjuncts.append(conj.atoms)
        else:
            for p in paths:
                if want is not None and p.return_value is not want:
                    continue
                if any(bits[site] != bit for site, bit in p.bernoulli_choices):
                    continue
                s_nnf = p.sensitive if sense > 0 else neg(p.sensitive)
                for conj in ddnf(_resolve_bits(s_nnf, bits), dnf_cap):
                    merged = _conj_merge(_Conj(p.constraints, ()), conj)
                    if merged is not None:
                        disjuncts.append(merged.atoms)
        components.append(EventComponent(
            tuple(sorted(bits.items())), weight, tuple(disjuncts)))
    return EventRegion(event, vtask.gaussian_dims, tuple(components))


def _nnf_key(n: Nnf) -> object:
    if isinstance(n, bool):
        return n
    if isinstance(n, BLit):
        return ("b", n.site, n.bit)
    if isinstance(n, AtomicCondition):
        return ("a",) + n.key()
    tag = "and" if isinstance(n, NAnd) else "or"
    return (tag, tuple(_nnf_key(i) for i in n.items))


# ---------------------------------------------------------------------------
# debug dump

def dump_paths(vtask: ValidatedTask, paths: list[PathCondition]) -> list[str]:
    """One line per path: `[component w=0.5] (atom) ∧ (atom) ⇒ return true`."""
    from .dsl.printer import format_atom

    site_by_index = {s.index: s for s in vtask.draw_sites}
    lines = []
    for p in paths:
        weight = 1.0
        parts = []
        for site, bit in p.bernoulli_choices:
            dist = site_by_index[site].dist
            weight *= dist.p if bit else 1.0 - dist.p
            parts.append(f"({site_by_index[site].base_name} = {bit})")
        parts.extend(f"({format_atom(a)})" for a in p.constraints)
        body = " ∧ ".join(parts) if parts else "(true)"
        ret = "true" if p.return_value else "false"
        lines.append(f"[component w={weight:g}] {body} ⇒ return {ret}")
    return lines
