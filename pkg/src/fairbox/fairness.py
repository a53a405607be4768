"""Fairness verdicts and checkable certificates.

The group-fairness ratio  (P[q&s]/P[s]) / (P[q&n]/P[n])  is bracketed by
interval arithmetic over the four event bounds; Fair requires the ratio's
lower bound to clear 1 - epsilon strictly, Unfair requires the upper bound
to fall to or below it.

A certificate pins each bound of the deciding inequality to a set of boxes an
external checker can re-classify and re-integrate: lower bounds via boxes
inside the event region, upper bounds via boxes disjoint from it (an upper
bound on an event is one minus a certified lower bound on its complement).
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field

from .dsl import ParseError, ValidationFailure, parse_source, validate
from .regions import Box, Classification, bind_region, classify
from .symexec import (
    EVENTS,
    PathExplosion,
    build_event_region,
    enumerate_paths,
)
from .volume import (
    DEFAULT_TRUNCATION_SIGMAS,
    ProbabilityBounds,
    RefinementBudget,
    VolumeSearch,
    box_mass,
    GaussianProduct,
    mixture_measure,
)

INF = float("inf")

FAIR = "fair"
UNFAIR = "unfair"
UNKNOWN = "unknown"

ROUND_QUOTA = 1000  # splits granted to each event region per round

MASS_TOLERANCE = 1e-9
WEIGHT_TOLERANCE = 1e-12


class InvalidBounds(Exception):
    """ratio_bounds input violates 0 <= lower <= upper <= 1."""


class NothingToCertify(Exception):
    """Unknown verdicts carry no deciding inequality to certify."""


@dataclass(frozen=True)
class RatioBounds:
    lower: float  # may be +inf (unreachable for sound inputs)
    upper: float  # +inf marks an unresolved denominator

    def __post_init__(self) -> None:
        if not self.lower <= self.upper:
            raise ValueError(f"ratio bounds inverted: [{self.lower}, {self.upper}]")


def _check_unit_interval(b, name: str) -> None:
    if not (0.0 <= b.lower <= b.upper <= 1.0):
        raise InvalidBounds(
            f"{name}: [{b.lower}, {b.upper}] is not within [0, 1]")


def _div_lower(num: float, den: float) -> float:
    if den == 0.0:
        return 0.0 if num == 0.0 else INF
    return num / den


def _div_upper(num: float, den: float) -> float:
    if den == 0.0:
        return INF
    return num / den


def _prod_lower(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def _prod_upper(a: float, b: float) -> float:
    if a == INF or b == INF:
        return INF
    return a * b


def ratio_bounds(p_qs, p_qn, p_s, p_n) -> RatioBounds:
    """Interval bracket of (P[q&s]/P[s]) / (P[q&n]/P[n]) from the four event
    brackets; zero denominators surface as +inf on the affected side."""
    for b, name in ((p_qs, "qualified&sensitive"), (p_qn, "qualified&not-sensitive"),
                    (p_s, "sensitive"), (p_n, "not-sensitive")):
        _check_unit_interval(b, name)
    lower = _prod_lower(_div_lower(p_qs.lower, p_s.upper),
                        _div_lower(p_n.lower, p_qn.upper))
    upper = _prod_upper(_div_upper(p_qs.upper, p_s.lower),
                        _div_upper(p_n.upper, p_qn.lower))
    return RatioBounds(lower, upper)


def decide(ratio: RatioBounds, epsilon: float) -> str:
    threshold = 1.0 - epsilon
    if ratio.lower > threshold:
        return FAIR
    if ratio.upper <= threshold:
        return UNFAIR
    return UNKNOWN


@dataclass
class Verdict:
    outcome: str
    ratio: RatioBounds
    probabilities: dict[str, ProbabilityBounds]
    epsilon: float
    budget: dict
    _searches: dict[str, VolumeSearch] = field(default_factory=dict, repr=False)
    _vtask: object = None


def check_fairness(
    vtask,
    budget: RefinementBudget = RefinementBudget(),
    epsilon: float | None = None,
    truncation_sigmas: float = DEFAULT_TRUNCATION_SIGMAS,
    engine: str | None = None,
    workers: int = 1,
    round_quota: int = ROUND_QUOTA,
    collect_boxes: bool = True,
    record_trace: bool = False,
) -> Verdict:
    """Refine the four event bounds round-robin until the verdict is decided
    or every region's split budget/gap target is exhausted (then Unknown)."""
    eps = vtask.task.spec.epsilon if epsilon is None else epsilon
    t0 = time.perf_counter()
    paths = enumerate_paths(vtask)
    searches: dict[str, VolumeSearch] = {}
    for event in EVENTS:
        region = build_event_region(paths, event, vtask)
        searches[event] = VolumeSearch(
            region,
            mixture_measure(vtask, region),
            truncation_sigmas=truncation_sigmas,
            engine=engine,
            collect_boxes=collect_boxes,
            record_trace=record_trace,
        )
    analyze_s = time.perf_counter() - t0
    t0 = time.perf_counter()

    rounds = 0
    while True:
        ratio = ratio_bounds(*(_Ivl(searches[e].lower, searches[e].upper)
                               for e in EVENTS))
        outcome = decide(ratio, eps)
        if outcome != UNKNOWN:
            break
        progressed = False
        for event in EVENTS:
            s = searches[event]
            remaining = budget.max_splits - s.splits_used
            if remaining <= 0 or s.exhausted or s.gap <= budget.gap_target:
                continue
            if s.refine(min(round_quota, remaining), budget.gap_target, workers):
                progressed = True
        rounds += 1
        if not progressed:
            ratio = ratio_bounds(*(_Ivl(searches[e].lower, searches[e].upper)
                                   for e in EVENTS))
            outcome = decide(ratio, eps)
            break

    probabilities = {e: searches[e].bounds() for e in EVENTS}
    report = {
        "rounds": rounds,
        "decided": outcome != UNKNOWN,
        "max_splits": budget.max_splits,
        "gap_target": budget.gap_target,
        "truncation_sigmas": truncation_sigmas,
        "engine": next(iter(searches.values())).engine_name,
        "splits": {e: searches[e].splits_used for e in EVENTS},
        "gaps": {e: searches[e].gap for e in EVENTS},
        "paths": len(paths),
        "analyze_s": analyze_s,
        "refine_s": time.perf_counter() - t0,
    }
    return Verdict(outcome, ratio, probabilities, eps, report,
                   _searches=searches, _vtask=vtask)


@dataclass(frozen=True)
class _Ivl:
    lower: float
    upper: float


# ---------------------------------------------------------------------------
# certificates

DIGEST_ALG = "sha256"

# entries backing each verdict's deciding inequality; "not:" marks a
# complement entry (boxes disjoint from the base event region)
_CERT_ENTRIES = {
    UNFAIR: (
        "not:qualified_and_sensitive",
        "sensitive",
        "not:not_sensitive",
        "qualified_and_not_sensitive",
    ),
    FAIR: (
        "qualified_and_sensitive",
        "not:sensitive",
        "not_sensitive",
        "not:qualified_and_not_sensitive",
    ),
}


@dataclass(frozen=True)
class CertComponent:
    key: tuple[tuple[int, int], ...]  # (bernoulli site, bit)
    weight: float
    boxes: tuple[tuple[tuple[float, float], ...], ...]  # box -> (lo, hi) per dim


@dataclass(frozen=True)
class CertEvent:
    components: tuple[CertComponent, ...]
    claimed_lower: float


@dataclass(frozen=True)
class Certificate:
    digest: str
    digest_alg: str
    truncation_sigmas: float
    epsilon: float
    verdict: str
    events: dict[str, CertEvent]
    ratio: RatioBounds
    probabilities: dict[str, tuple[float, float]]


@dataclass(frozen=True)
class CheckResult:
    accepted: bool
    reason: str | None = None


def source_digest(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


def _gaussian_product(vtask) -> GaussianProduct:
    return GaussianProduct(
        tuple(s.dist.mean for s in vtask.gaussian_sites),
        tuple(s.dist.stddev for s in vtask.gaussian_sites),
    )


def _resummed_lower(components: tuple[CertComponent, ...], g: GaussianProduct,
                    dims: tuple[str, ...]) -> float:
    total = 0.0
    for comp in components:
        acc = 0.0
        for lo_hi in comp.boxes:
            box = Box(dims, tuple(p[0] for p in lo_hi), tuple(p[1] for p in lo_hi))
            acc += box_mass(box, g)
        total += comp.weight * acc
    return total


def emit_certificate(verdict: Verdict, source: str) -> Certificate:
    """Certificate for a decided verdict: the box sets backing the bounds the
    deciding inequality actually uses, plus enough metadata to re-check."""
    if verdict.outcome == UNKNOWN:
        raise NothingToCertify("no certificate for an Unknown verdict")
    vtask = verdict._vtask
    if any(not s.problem.collect_boxes for s in verdict._searches.values()):
        raise ValueError(
            "verdict was computed with collect_boxes=False; re-run "
            "check_fairness with box collection to emit a certificate")
    dims = vtask.gaussian_dims
    g = _gaussian_product(vtask)
    events: dict[str, CertEvent] = {}
    for entry in _CERT_ENTRIES[verdict.outcome]:
        complement = entry.startswith("not:")
        base = entry[4:] if complement else entry
        search = verdict._searches[base]
        raw = (search.raw_empty_boxes() if complement
               else search.raw_full_boxes())
        weights = search.problem.weights
        keys = search.component_keys
        comps = []
        for idx, box_list in enumerate(raw):
            boxes = tuple(
                tuple((lo[j], hi[j]) for j in range(len(dims)))
                for lo, hi in box_list
            )
            comps.append(CertComponent(keys[idx], weights[idx], boxes))
        comps = tuple(comps)
        events[entry] = CertEvent(comps, _resummed_lower(comps, g, dims))
    return Certificate(
        digest=source_digest(source),
        digest_alg=DIGEST_ALG,
        truncation_sigmas=verdict.budget["truncation_sigmas"],
        epsilon=verdict.epsilon,
        verdict=verdict.outcome,
        events=events,
        ratio=verdict.ratio,
        probabilities={e: (b.lower, b.upper)
                       for e, b in verdict.probabilities.items()},
    )


def verify_certificate(cert: Certificate, source: str) -> CheckResult:
    """Hostile-input re-check: digest, box classification, disjointness,
    mass re-summation, and the deciding verdict inequality."""
    if cert.digest_alg != DIGEST_ALG:
        return CheckResult(False, f"unsupported digest algorithm {cert.digest_alg!r}")
    if source_digest(source) != cert.digest:
        return CheckResult(False, "digest mismatch")
    if cert.verdict not in _CERT_ENTRIES:
        return CheckResult(False, f"unknown verdict {cert.verdict!r}")
    if not 0.0 < cert.epsilon < 1.0:
        return CheckResult(False, f"epsilon {cert.epsilon!r} outside (0, 1)")
    try:
        vtask = validate(parse_source(source))
        paths = enumerate_paths(vtask)
    except (ParseError, ValidationFailure, PathExplosion) as exc:
        return CheckResult(False, f"source failed to parse/validate: {exc}")

    dims = vtask.gaussian_dims
    g = _gaussian_product(vtask)
    claimed: dict[str, float] = {}
    for entry in _CERT_ENTRIES[cert.verdict]:
        if entry not in cert.events:
            return CheckResult(False, f"missing event entry {entry!r}")
        complement = entry.startswith("not:")
        base = entry[4:] if complement else entry
        try:
            region = build_event_region(paths, base, vtask)
        except PathExplosion as exc:
            return CheckResult(False, f"region reconstruction failed: {exc}")
        by_key = {c.key: c for c in region.components}
        total = 0.0
        for comp in cert.events[entry].components:
            rc = by_key.get(tuple(comp.key))
            if rc is None:
                return CheckResult(
                    False, f"unknown component {comp.key!r} in {entry!r}")
            if abs(rc.weight - comp.weight) > WEIGHT_TOLERANCE:
                return CheckResult(
                    False, f"component weight mismatch in {entry!r}")
            bound = bind_region(rc.region, dims)
            boxes = []
            for lo_hi in comp.boxes:
                if len(lo_hi) != len(dims):
                    return CheckResult(False, f"malformed box in {entry!r}")
                lo = tuple(float(p[0]) for p in lo_hi)
                hi = tuple(float(p[1]) for p in lo_hi)
                if not all(math.isfinite(a) and math.isfinite(b) and a <= b
                           for a, b in zip(lo, hi)):
                    return CheckResult(False, f"malformed box in {entry!r}")
                box = Box(dims, lo, hi)
                cls = classify(box, bound)
                want = Classification.EMPTY if complement else Classification.FULL
                if cls is not want:
                    return CheckResult(
                        False,
                        f"non-Full box in {entry!r}" if not complement else
                        f"non-Full box for the complement in {entry!r}")
                boxes.append(box)
            if _any_overlap(boxes):
                return CheckResult(False, f"overlap in {entry!r}")
            total += comp.weight * sum(box_mass(b, g) for b in boxes)
        if abs(total - cert.events[entry].claimed_lower) > MASS_TOLERANCE:
            return CheckResult(False, f"mass mismatch in {entry!r}")
        if total > 1.0 + MASS_TOLERANCE:
            return CheckResult(False, f"mass mismatch in {entry!r}")
        claimed[entry] = min(total, 1.0)

    threshold = 1.0 - cert.epsilon
    if cert.verdict == UNFAIR:
        up = _prod_upper(
            _div_upper(1.0 - claimed["not:qualified_and_sensitive"],
                       claimed["sensitive"]),
            _div_upper(1.0 - claimed["not:not_sensitive"],
                       claimed["qualified_and_not_sensitive"]),
        )
        if not up <= threshold:
            return CheckResult(False, "verdict inequality fails")
    else:
        lo = _prod_lower(
            _div_lower(claimed["qualified_and_sensitive"],
                       1.0 - claimed["not:sensitive"]),
            _div_lower(claimed["not_sensitive"],
                       1.0 - claimed["not:qualified_and_not_sensitive"]),
        )
        if not lo > threshold:
            return CheckResult(False, "verdict inequality fails")
    return CheckResult(True, None)


def _any_overlap(boxes: list[Box]) -> bool:
    """Pairwise open-interior intersection; shared faces are allowed."""
    m = len(boxes)
    for i in range(m):
        a = boxes[i]
        for j in range(i + 1, m):
            b = boxes[j]
            if all(al < bh and bl < ah for al, ah, bl, bh
                   in zip(a.lo, a.hi, b.lo, b.hi)):
                return True
    return False


# ---------------------------------------------------------------------------
# certificate (de)serialization

def _num_to_json(x: float):
    return "inf" if x == INF else x


def _num_from_json(x) -> float:
    return INF if x == "inf" else float(x)


def certificate_to_json(cert: Certificate) -> str:
    obj = {
        "digest": cert.digest,
        "digest_alg": cert.digest_alg,
        "K": cert.truncation_sigmas,
        "epsilon": cert.epsilon,
        "verdict": cert.verdict,
        "events": {
            name: {
                "components": [
                    {
                        "id": [list(pair) for pair in comp.key],
                        "weight": comp.weight,
                        "boxes": [[list(iv) for iv in box] for box in comp.boxes],
                    }
                    for comp in ev.components
                ],
                "claimed_lower": ev.claimed_lower,
            }
            for name, ev in cert.events.items()
        },
        "ratio": {
            "lower": _num_to_json(cert.ratio.lower),
            "upper": _num_to_json(cert.ratio.upper),
        },
        "probabilities": {
            name: {"lower": lo, "upper": up}
            for name, (lo, up) in cert.probabilities.items()
        },
    }
    return json.dumps(obj, sort_keys=True, indent=1)


def certificate_from_json(text: str) -> Certificate:
    obj = json.loads(text)
    events = {}
    for name, ev in obj["events"].items():
        comps = tuple(
            CertComponent(
                key=tuple((int(s), int(b)) for s, b in comp["id"]),
                weight=float(comp["weight"]),
                boxes=tuple(
                    tuple((float(iv[0]), float(iv[1])) for iv in box)
                    for box in comp["boxes"]
                ),
            )
            for comp in ev["components"]
        )
        events[name] = CertEvent(comps, float(ev["claimed_lower"]))
    return Certificate(
        digest=obj["digest"],
        digest_alg=obj["digest_alg"],
        truncation_sigmas=float(obj["K"]),
        epsilon=float(obj["epsilon"]),
        verdict=obj["verdict"],
        events=events,
        ratio=RatioBounds(
            _num_from_json(obj["ratio"]["lower"]),
            _num_from_json(obj["ratio"]["upper"]),
        ),
        probabilities={
            name: (float(v["lower"]), float(v["upper"]))
            for name, v in obj.get("probabilities", {}).items()
        },
    )
