"""Geometry kernel: axis-aligned boxes, exact extrema of linear forms over a
box, and the sound three-way classification of a box against a region (a
disjunction of conjunctions of linear atoms).

Linear forms attain their extrema at box corners, so classification needs no
search; accumulated rounding is covered by nudging both extrema outward by a
relative slack, which can only demote Full/Empty to Mixed, never the reverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .dsl.nodes import AtomicCondition, LinearExpression, Relation

# Outward slack: 2^-40 times the accumulated term magnitude (with an absolute
# floor), dominating the true rounding bound of ~(n+1)*2^-53 * sum|terms| even
# under cancellation; an all-zero accumulation is exact and gets no slack, so
# boxes aligned exactly with an atom's boundary still classify decisively.
SLACK_REL = 2.0 ** -40
SLACK_ABS = 1e-300


class MissingDimension(Exception):
    """A linear form mentions a variable the box has no interval for."""


class DegenerateDimension(Exception):
    """Attempt to bisect a zero-width dimension."""


class Classification(Enum):
    EMPTY = 0
    MIXED = 1
    FULL = 2


@dataclass(frozen=True)
class Box:
    """Product of closed intervals; dims names the coordinates in order."""

    dims: tuple[str, ...]
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (len(self.dims) == len(self.lo) == len(self.hi)):
            raise ValueError("dims/lo/hi length mismatch")
        for d, a, b in zip(self.dims, self.lo, self.hi):
            if not (math.isfinite(a) and math.isfinite(b) and a <= b):
                raise ValueError(f"bad interval for {d}: [{a}, {b}]")

    def width(self, d: int) -> float:
        return self.hi[d] - self.lo[d]

    def contains(self, point: Sequence[float]) -> bool:
        return all(a <= x <= b for a, x, b in zip(self.lo, point, self.hi))


@dataclass(frozen=True)
class BoundAtom:
    """Atom with coefficients aligned to a fixed dimension order."""

    coeffs: tuple[float, ...]
    const: float
    rel: Relation


# region = disjunction of conjunctions
BoundRegion = tuple[tuple[BoundAtom, ...], ...]


def bind_atom(atom: AtomicCondition, dims: Sequence[str]) -> BoundAtom:
    index = {name: i for i, name in enumerate(dims)}
    coeffs = [0.0] * len(dims)
    for name, coef in atom.lhs.terms:
        if name not in index:
            raise MissingDimension(f"no box dimension for variable {name!r}")
        coeffs[index[name]] += coef
    return BoundAtom(tuple(coeffs), atom.lhs.const, atom.rel)


def bind_region(
    disjuncts: Sequence[Sequence[AtomicCondition]], dims: Sequence[str]
) -> BoundRegion:
    return tuple(tuple(bind_atom(a, dims) for a in conj) for conj in disjuncts)


def _slack(acc: float) -> float:
    if acc == 0.0:
        return 0.0
    s = acc * SLACK_REL
    return s if s > SLACK_ABS else SLACK_ABS


def atom_range(atom: BoundAtom, lo: Sequence[float], hi: Sequence[float]) -> tuple[float, float]:
    mn = atom.const
    mx = atom.const
    acc_mn = abs(atom.const)
    acc_mx = acc_mn
    for c, a, b in zip(atom.coeffs, lo, hi):
        if c > 0.0:
            p = c * a
            q = c * b
        elif c < 0.0:
            p = c * b
            q = c * a
        else:
            continue
        mn += p
        acc_mn += abs(p)
        mx += q
        acc_mx += abs(q)
    return mn - _slack(acc_mn), mx + _slack(acc_mx)


def linexpr_range(e: LinearExpression, box: Box) -> tuple[float, float]:
    """Guaranteed bracket of e over the box: min <= e(x) <= max everywhere."""
    index = {name: i for i, name in enumerate(box.dims)}
    for name, _ in e.terms:
        if name not in index:
            raise MissingDimension(f"no box dimension for variable {name!r}")
    coeffs = [0.0] * len(box.dims)
    for name, c in e.terms:
        coeffs[index[name]] += c
    return atom_range(BoundAtom(tuple(coeffs), e.const, Relation.LE),
                      box.lo, box.hi)


def _atom_state(atom: BoundAtom, lo, hi) -> int:
    """1 = holds over the whole box, -1 = violated over the whole box,
    0 = undetermined.

    Strict and non-strict relations classify alike (boundaries carry no
    mass), so both the satisfied and the violated test compare closed: a box
    touching a hyperplane from the non-satisfying side is Empty, not Mixed.
    An == atom holds on a measure-zero slice unless the form is identically
    zero over the box, so it classifies Empty except in that degenerate case.
    """
    mn, mx = atom_range(atom, lo, hi)
    rel = atom.rel
    if rel is Relation.LE or rel is Relation.LT:
        if mx <= 0.0:
            return 1
        if mn >= 0.0:
            return -1
        return 0
    if rel is Relation.GE or rel is Relation.GT:
        if mn >= 0.0:
            return 1
        if mx <= 0.0:
            return -1
        return 0
    if mn == 0.0 and mx == 0.0:
        return 1
    return -1


def classify_raw(lo: Sequence[float], hi: Sequence[float], region: BoundRegion) -> Classification:
    all_empty = True
    for conj in region:
        conj_full = True
        conj_empty = False
        for atom in conj:
            state = _atom_state(atom, lo, hi)
            if state == -1:
                conj_empty = True
                break
            if state != 1:
                conj_full = False
        if conj_empty:
            continue
        all_empty = False
        if conj_full:
            return Classification.FULL
    return Classification.EMPTY if all_empty else Classification.MIXED


def classify(box: Box, region: BoundRegion) -> Classification:
    """Full if a single disjunct holds over the entire box, Empty if every
    disjunct is refuted over the entire box, Mixed otherwise."""
    for conj in region:
        for atom in conj:
            if len(atom.coeffs) != len(box.dims):
                raise MissingDimension(
                    f"atom has {len(atom.coeffs)} coefficients for a "
                    f"{len(box.dims)}-dimensional box")
    return classify_raw(box.lo, box.hi, region)


def bisect(box: Box, d: int) -> tuple[Box, Box]:
    """Split at the midpoint of dimension d; children partition the box
    exactly (the shared face has measure zero)."""
    a, b = box.lo[d], box.hi[d]
    if a == b:
        raise DegenerateDimension(f"dimension {box.dims[d]} has zero width")
    mid = 0.5 * (a + b)
    if not (a < mid < b):
        raise DegenerateDimension(
            f"dimension {box.dims[d]} is too thin to split at double precision")
    left_hi = list(box.hi)
    left_hi[d] = mid
    right_lo = list(box.lo)
    right_lo[d] = mid
    return (
        Box(box.dims, box.lo, tuple(left_hi)),
        Box(box.dims, tuple(right_lo), box.hi),
    )
