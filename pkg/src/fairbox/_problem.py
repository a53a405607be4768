"""Shared flat description of one bounding problem, consumed by both the
pure-Python and the compiled refinement engines."""

from __future__ import annotations

from dataclasses import dataclass

# relation codes shared with the compiled kernel
REL_LE = 0
REL_LT = 1
REL_GE = 2
REL_GT = 3
REL_EQ = 4

# atom = (coefficients per dim, constant, relation code)
Atom = tuple[tuple[float, ...], float, int]
Disjunct = tuple[Atom, ...]
ComponentRegion = tuple[Disjunct, ...]


@dataclass(frozen=True)
class CompiledProblem:
    dims: tuple[str, ...]
    mu: tuple[float, ...]
    sigma: tuple[float, ...]
    weights: tuple[float, ...]            # one per mixture component
    regions: tuple[ComponentRegion, ...]  # one per mixture component
    root_lo: tuple[float, ...]
    root_hi: tuple[float, ...]
    collect_boxes: bool = True
    record_trace: bool = False
