"""Ratio bounds, verdicts, and certificate round-trips/tampering."""

import json
import math

import numpy as np
import pytest

from conftest import CASE_RATIO, load, vtask_for
from fairbox.fairness import (
    FAIR,
    INF,
    UNFAIR,
    UNKNOWN,
    InvalidBounds,
    NothingToCertify,
    RatioBounds,
    certificate_from_json,
    certificate_to_json,
    check_fairness,
    decide,
    emit_certificate,
    ratio_bounds,
    verify_certificate,
)
from fairbox.volume import RefinementBudget


class B:
    def __init__(self, lower, upper):
        self.lower = lower
        self.upper = upper


def test_ratio_symmetric_point():
    r = ratio_bounds(B(0.5, 0.5), B(0.5, 0.5), B(0.5, 0.5), B(0.5, 0.5))
    assert r.lower == 1.0 and r.upper == 1.0


def test_ratio_no_qualified_minorities():
    r = ratio_bounds(B(0.0, 0.0), B(0.2, 0.3), B(0.4, 0.5), B(0.5, 0.6))
    assert r.lower == 0.0 and r.upper == 0.0


def test_ratio_unresolved_denominator():
    r = ratio_bounds(B(0.1, 0.2), B(0.0, 0.3), B(0.4, 0.5), B(0.5, 0.6))
    assert r.upper == INF
    assert r.lower < INF


def test_ratio_zero_over_zero():
    r = ratio_bounds(B(0.0, 0.1), B(0.0, 0.1), B(0.0, 0.1), B(0.0, 0.1))
    assert r.lower == 0.0
    assert r.upper == INF


def test_ratio_invalid_bounds():
    with pytest.raises(InvalidBounds):
        ratio_bounds(B(0.4, 0.2), B(0, 1), B(0, 1), B(0, 1))
    with pytest.raises(InvalidBounds):
        ratio_bounds(B(0, 1.2), B(0, 1), B(0, 1), B(0, 1))


def test_ratio_monotone_under_widening():
    rng = np.random.default_rng(4)
    for _ in range(300):
        vals = np.sort(rng.uniform(0.01, 0.99, 8).reshape(4, 2), axis=1)
        bounds = [B(lo, hi) for lo, hi in vals]
        r1 = ratio_bounds(*bounds)
        j = int(rng.integers(0, 4))
        widened = [B(b.lower, b.upper) for b in bounds]
        widened[j] = B(bounds[j].lower * rng.uniform(0, 1),
                       min(1.0, bounds[j].upper * rng.uniform(1, 1.5)))
        r2 = ratio_bounds(*widened)
        assert r2.lower <= r1.lower + 1e-12
        assert r2.upper >= r1.upper - 1e-12


def test_decide_directions():
    assert decide(RatioBounds(0.95, 1.2), 0.1) == FAIR
    assert decide(RatioBounds(0.2, 0.9), 0.1) == UNFAIR  # <= is unfair
    assert decide(RatioBounds(0.85, 0.95), 0.1) == UNKNOWN
    assert decide(RatioBounds(0.9, 1.1), 0.1) == UNKNOWN  # lower not strictly >


def test_constant_true_is_fair():
    v = check_fairness(vtask_for("const_true.fg"))
    assert v.outcome == FAIR
    assert v.ratio.lower <= 1.0 <= v.ratio.upper or v.ratio.lower > 0.9


def test_symmetric_program_is_fair():
    v = check_fairness(vtask_for("symmetric.fg"))
    assert v.outcome == FAIR


def test_case_study_is_unfair(case_study):
    v = check_fairness(case_study)
    assert v.outcome == UNFAIR
    assert v.ratio.upper < 0.9
    assert v.ratio.lower <= CASE_RATIO <= v.ratio.upper


def test_unknown_on_tiny_budget(case_study):
    v = check_fairness(case_study, RefinementBudget(4, 1e-4))
    assert v.outcome == UNKNOWN
    assert not v.budget["decided"]


def test_decidedness_monotone_in_budget(case_study):
    small = check_fairness(case_study, RefinementBudget(20_000, 1e-4))
    assert small.outcome == UNFAIR
    bigger = check_fairness(case_study, RefinementBudget(80_000, 1e-4))
    assert bigger.outcome == small.outcome


def test_bernoulli_fixture_is_unfair():
    # group 1 needs N(-1,1) > 0 (p ~ 0.159) vs group 0 N(0,1) > 0 (p = 0.5);
    # ratio ~ 0.317 < 0.9
    v = check_fairness(vtask_for("bernoulli.fg"))
    assert v.outcome == UNFAIR


def test_verdict_never_contradicts_mc_oracle():
    """Where the sampling oracle's 99% interval for the ratio clears the
    threshold on one side, the verdict never lands on the other side."""
    from fairbox.mc import mc_estimate

    for name in ("casestudy.fg", "const_true.fg", "symmetric.fg",
                 "bernoulli.fg", "halfspace.fg", "disjunctive.fg"):
        vt = vtask_for(name)
        v = check_fairness(vt)
        est = mc_estimate(vt, 400_000, seed=123)
        if est.ratio is None:
            continue
        parts = 0.0
        degenerate = False
        for e in est.events.values():
            if e.stderr is None or e.estimate == 0.0:
                degenerate = True
                break
            parts += (e.stderr / e.estimate) ** 2
        if degenerate:
            continue
        se = est.ratio * math.sqrt(parts)
        threshold = 1.0 - v.epsilon
        if est.ratio - 2.58 * se > threshold:
            assert v.outcome != UNFAIR, name
        if est.ratio + 2.58 * se < threshold:
            assert v.outcome != FAIR, name


# ---------------------------------------------------------------------------
# certificates

def _decided(name: str):
    src = load(name)
    vt = vtask_for(name)
    verdict = check_fairness(vt)
    assert verdict.outcome != UNKNOWN
    return src, verdict


@pytest.mark.parametrize("name", ["casestudy.fg", "const_true.fg",
                                  "symmetric.fg", "bernoulli.fg",
                                  "coinflips.fg"])
def test_certificate_round_trip(name):
    src, verdict = _decided(name)
    cert = emit_certificate(verdict, src)
    assert verify_certificate(cert, src).accepted
    again = certificate_from_json(certificate_to_json(cert))
    assert verify_certificate(again, src).accepted


def test_certificate_boxes_resum(case_study):
    src, verdict = load("casestudy.fg"), check_fairness(case_study)
    cert = emit_certificate(verdict, src)
    # claimed lower is the checker's own re-summation; re-serialize and check
    text = certificate_to_json(cert)
    cert2 = certificate_from_json(text)
    for name, ev in cert2.events.items():
        assert ev.claimed_lower == pytest.approx(
            cert.events[name].claimed_lower, abs=1e-12)


def test_unknown_has_nothing_to_certify(case_study):
    v = check_fairness(case_study, RefinementBudget(4, 1e-4))
    with pytest.raises(NothingToCertify):
        emit_certificate(v, load("casestudy.fg"))


def _tamper(cert_text: str, fn):
    obj = json.loads(cert_text)
    fn(obj)
    return json.dumps(obj)


def test_tampered_source_digest(case_study):
    src, verdict = _decided("casestudy.fg")
    cert = emit_certificate(verdict, src)
    res = verify_certificate(cert, src + "\n# edited\n")
    assert not res.accepted
    assert "digest" in res.reason


def test_tampered_box_across_hyperplane(case_study):
    src, verdict = _decided("casestudy.fg")
    text = certificate_to_json(emit_certificate(verdict, src))

    def shift(obj):
        # sensitive region is ethnicity > 10: drag a certified box below it
        comp = obj["events"]["sensitive"]["components"][0]
        box = comp["boxes"][0]
        box[0] = [box[0][0] - 40.0, box[0][1] - 40.0]

    res = verify_certificate(certificate_from_json(_tamper(text, shift)), src)
    assert not res.accepted
    assert "non-Full box" in res.reason


def test_tampered_claimed_lower(case_study):
    src, verdict = _decided("casestudy.fg")
    text = certificate_to_json(emit_certificate(verdict, src))

    def inflate(obj):
        obj["events"]["sensitive"]["claimed_lower"] += 1e-3

    res = verify_certificate(certificate_from_json(_tamper(text, inflate)), src)
    assert not res.accepted
    assert "mass mismatch" in res.reason


def test_tampered_overlapping_boxes(case_study):
    src, verdict = _decided("casestudy.fg")
    text = certificate_to_json(emit_certificate(verdict, src))

    def duplicate(obj):
        comp = obj["events"]["sensitive"]["components"][0]
        comp["boxes"].append(comp["boxes"][0])

    res = verify_certificate(certificate_from_json(_tamper(text, duplicate)), src)
    assert not res.accepted
    assert "overlap" in res.reason


def test_tampered_weight(case_study):
    src, verdict = _decided("bernoulli.fg")
    text = certificate_to_json(emit_certificate(verdict, src))

    def reweigh(obj):
        for ev in obj["events"].values():
            for comp in ev["components"]:
                comp["weight"] = 0.9

    res = verify_certificate(certificate_from_json(_tamper(text, reweigh)), src)
    assert not res.accepted
    assert "weight" in res.reason


def test_epsilon_out_of_range_rejected(case_study):
    src, verdict = _decided("casestudy.fg")
    text = certificate_to_json(emit_certificate(verdict, src))

    def stretch(obj):
        obj["epsilon"] = -3.0  # would make any 'unfair' claim vacuous

    res = verify_certificate(certificate_from_json(_tamper(text, stretch)), src)
    assert not res.accepted
    assert "epsilon" in res.reason


def test_malformed_box_rejected(case_study):
    src, verdict = _decided("casestudy.fg")
    text = certificate_to_json(emit_certificate(verdict, src))

    def corrupt(obj):
        comp = obj["events"]["sensitive"]["components"][0]
        comp["boxes"][0] = [[0.0, -1.0], [0.0, 1.0], [0.0, 1.0]]

    res = verify_certificate(certificate_from_json(_tamper(text, corrupt)), src)
    assert not res.accepted


def test_certificate_is_self_contained(case_study, tmp_path):
    # verification uses only certificate + source text
    src, verdict = _decided("casestudy.fg")
    cert_path = tmp_path / "cert.json"
    cert_path.write_text(certificate_to_json(emit_certificate(verdict, src)))
    reloaded = certificate_from_json(cert_path.read_text())
    assert verify_certificate(reloaded, src).accepted


def test_discrete_only_model_is_exact():
    # no continuous draws: every event decides at the root, bounds are points
    v = check_fairness(vtask_for("coinflips.fg"))
    assert v.outcome == FAIR
    assert v.ratio == RatioBounds(4.0, 4.0)
    qs = v.probabilities["qualified_and_sensitive"]
    assert (qs.lower, qs.upper) == (0.5, 0.5)
    qn = v.probabilities["qualified_and_not_sensitive"]
    assert (qn.lower, qn.upper) == (0.125, 0.125)
