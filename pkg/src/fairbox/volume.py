"""Certified lower/upper bounds on the probability mass of an event region
under a Gaussian mixture measure, by branch-and-bound over boxes.

The lower bound accumulates Full boxes; the upper bound is lower + unresolved
Mixed mass + truncation tail, which is exactly the complement-side scheme
(mass proven Empty is a lower bound on the complement within the root box).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._problem import (
    REL_EQ,
    REL_GE,
    REL_GT,
    REL_LE,
    REL_LT,
    CompiledProblem,
)
from .dsl.nodes import Relation
from .engine import get_refiner_class
from .normal import gaussian_cdf
from .regions import Box, MissingDimension, bind_region
from .symexec import EventRegion

__all__ = [
    "GaussianProduct",
    "MixtureMeasure",
    "ProbabilityBounds",
    "RefinementBudget",
    "VolumeSearch",
    "bound_volume",
    "box_mass",
    "gaussian_cdf",
    "mixture_measure",
]

DEFAULT_MAX_SPLITS = 200_000
DEFAULT_GAP_TARGET = 1e-4
DEFAULT_TRUNCATION_SIGMAS = 10.0

_REL_CODE = {
    Relation.LE: REL_LE,
    Relation.LT: REL_LT,
    Relation.GE: REL_GE,
    Relation.GT: REL_GT,
    Relation.EQ: REL_EQ,
}


@dataclass(frozen=True)
class GaussianProduct:
    """Independent Gaussians, one per dimension of the base vector."""

    mean: tuple[float, ...]
    stddev: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.mean) != len(self.stddev):
            raise ValueError("mean/stddev length mismatch")
        for s in self.stddev:
            if not (s > 0.0 and math.isfinite(s)):
                raise ValueError(f"stddev must be positive and finite, got {s}")


@dataclass(frozen=True)
class MixtureMeasure:
    components: tuple[tuple[float, GaussianProduct], ...]

    def __post_init__(self) -> None:
        total = 0.0
        for w, _ in self.components:
            if not w > 0.0:
                raise ValueError(f"component weight must be positive, got {w}")
            total += w
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"component weights sum to {total!r}, not 1")


@dataclass(frozen=True)
class RefinementBudget:
    max_splits: int = DEFAULT_MAX_SPLITS
    gap_target: float = DEFAULT_GAP_TARGET


@dataclass
class ProbabilityBounds:
    lower: float
    upper: float
    full_boxes: tuple[tuple[Box, ...], ...]  # per mixture component
    mixed_mass: float
    tail_mass: float
    splits_used: int
    empty_boxes: tuple[tuple[Box, ...], ...] = ()

    def __post_init__(self) -> None:
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise ValueError(
                f"invalid bounds [{self.lower}, {self.upper}]")


def box_mass(box: Box, g: GaussianProduct) -> float:
    """Gaussian-product mass of a box: product of per-dimension CDF
    differences; 0 for any zero-width dimension."""
    if len(box.dims) != len(g.mean):
        raise MissingDimension(
            f"box has {len(box.dims)} dimensions, measure has {len(g.mean)}")
    mass = 1.0
    for lo, hi, mu, sd in zip(box.lo, box.hi, g.mean, g.stddev):
        f = gaussian_cdf((hi - mu) / sd) - gaussian_cdf((lo - mu) / sd)
        if f <= 0.0:
            return 0.0
        mass *= f
    return mass


def mixture_measure(vtask, region: EventRegion) -> MixtureMeasure:
    """The measure whose components correspond one-to-one with the event
    region's Bernoulli components (all share the draw sites' Gaussians)."""
    g = GaussianProduct(
        tuple(s.dist.mean for s in vtask.gaussian_sites),
        tuple(s.dist.stddev for s in vtask.gaussian_sites),
    )
    return MixtureMeasure(tuple((c.weight, g) for c in region.components))


def compile_problem(
    region: EventRegion,
    measure: MixtureMeasure,
    truncation_sigmas: float = DEFAULT_TRUNCATION_SIGMAS,
    collect_boxes: bool = True,
    record_trace: bool = False,
) -> CompiledProblem:
    if len(region.components) != len(measure.components):
        raise ValueError("region and measure component counts differ")
    if not measure.components:
        raise ValueError("measure has no components")
    g = measure.components[0][1]
    for w_m, g_k in measure.components:
        if g_k.mean != g.mean or g_k.stddev != g.stddev:
            raise ValueError("per-component Gaussians must share draw sites")
    for (w_m, _), comp in zip(measure.components, region.components):
        if abs(w_m - comp.weight) > 1e-12:
            raise ValueError("region/measure component weights disagree")
    dims = region.dims
    compiled_regions = []
    for comp in region.components:
        bound = bind_region(comp.region, dims)
        compiled_regions.append(tuple(
            tuple((a.coeffs, a.const, _REL_CODE[a.rel]) for a in conj)
            for conj in bound
        ))
    k = truncation_sigmas
    root_lo = tuple(m - k * s for m, s in zip(g.mean, g.stddev))
    root_hi = tuple(m + k * s for m, s in zip(g.mean, g.stddev))
    return CompiledProblem(
        dims=dims,
        mu=g.mean,
        sigma=g.stddev,
        weights=tuple(w for w, _ in measure.components),
        regions=tuple(compiled_regions),
        root_lo=root_lo,
        root_hi=root_hi,
        collect_boxes=collect_boxes,
        record_trace=record_trace,
    )


class VolumeSearch:
    """Resumable bounding run for one event region; check_fairness refines
    the four of these round-robin."""

    def __init__(
        self,
        region: EventRegion,
        measure: MixtureMeasure,
        truncation_sigmas: float = DEFAULT_TRUNCATION_SIGMAS,
        engine: str | None = None,
        collect_boxes: bool = True,
        record_trace: bool = False,
    ):
        self.region = region
        self.problem = compile_problem(
            region, measure, truncation_sigmas, collect_boxes, record_trace)
        refiner_cls = get_refiner_class(engine)
        self.engine_name = refiner_cls.name
        self._refiner = refiner_cls(self.problem)

    @property
    def component_keys(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        return tuple(c.key for c in self.region.components)

    def refine(self, max_splits: int, gap_target: float = 0.0,
               workers: int = 1) -> int:
        return self._refiner.refine(max_splits, gap_target, workers)

    @property
    def lower(self) -> float:
        return max(0.0, self._refiner.lower)

    @property
    def upper(self) -> float:
        return min(1.0, self._refiner.upper)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    @property
    def splits_used(self) -> int:
        return self._refiner.splits_used

    @property
    def exhausted(self) -> bool:
        return self._refiner.exhausted

    @property
    def trace(self) -> tuple[list[float], list[float]]:
        return self._refiner.trace_lower, self._refiner.trace_upper

    def _boxes(self, store) -> tuple[tuple[Box, ...], ...]:
        dims = self.problem.dims
        return tuple(
            tuple(Box(dims, lo, hi) for lo, hi in comp) for comp in store
        )

    def full_boxes(self) -> tuple[tuple[Box, ...], ...]:
        return self._boxes(self._refiner.full_boxes)

    def empty_boxes(self) -> tuple[tuple[Box, ...], ...]:
        return self._boxes(self._refiner.empty_boxes)

    def raw_full_boxes(self):
        return self._refiner.full_boxes

    def raw_empty_boxes(self):
        return self._refiner.empty_boxes

    def bounds(self, materialize_boxes: bool = True) -> ProbabilityBounds:
        r = self._refiner
        if materialize_boxes and self.problem.collect_boxes:
            full = self.full_boxes()
            empty = self.empty_boxes()
        else:
            full = ()
            empty = ()
        return ProbabilityBounds(
            lower=self.lower,
            upper=self.upper,
            full_boxes=full,
            mixed_mass=r.mixed,
            tail_mass=r.tail,
            splits_used=r.splits_used,
            empty_boxes=empty,
        )


def bound_volume(
    region: EventRegion,
    measure: MixtureMeasure,
    budget: RefinementBudget = RefinementBudget(),
    truncation_sigmas: float = DEFAULT_TRUNCATION_SIGMAS,
    engine: str | None = None,
    workers: int = 1,
    collect_boxes: bool = True,
    record_trace: bool = False,
) -> ProbabilityBounds:
    """Refine until the gap target or split budget is met (exhausting the
    budget is a result, not an error) and return certified bounds."""
    search = VolumeSearch(
        region, measure, truncation_sigmas, engine, collect_boxes, record_trace)
    search.refine(budget.max_splits, budget.gap_target, workers)
    return search.bounds()
