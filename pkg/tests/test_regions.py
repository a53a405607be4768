"""Geometry kernel: ranges, classification, bisection."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairbox.dsl.nodes import LinearExpression, Relation
from fairbox.mc import interpret_point
from fairbox.regions import (
    Box,
    BoundAtom,
    Classification,
    DegenerateDimension,
    MissingDimension,
    bind_region,
    bisect,
    classify,
    linexpr_range,
)
from fairbox.symexec import build_event_region, enumerate_paths


def expr(terms, const=0.0):
    return LinearExpression(tuple(terms.items()), const)


def test_range_single_term():
    box = Box(("x",), (0.0,), (30.0,))
    lo, hi = linexpr_range(expr({"x": 1.0}, -10.0), box)
    assert lo <= -10.0 <= 20.0 <= hi
    assert lo == pytest.approx(-10.0, abs=1e-9)
    assert hi == pytest.approx(20.0, abs=1e-9)


def test_range_two_terms():
    box = Box(("x", "y"), (0.0, 0.0), (1.0, 1.0))
    lo, hi = linexpr_range(expr({"x": 2.0, "y": -1.0}, 1.0), box)
    assert lo == pytest.approx(0.0, abs=1e-9)
    assert hi == pytest.approx(3.0, abs=1e-9)
    assert lo <= 0.0 and hi >= 3.0


def test_range_zero_coefficient_constant():
    box = Box(("x",), (-7.0, ), (9.0, ))
    lo, hi = linexpr_range(expr({"x": 0.0}, 5.0), box)
    assert lo == pytest.approx(5.0, rel=1e-9)
    assert hi == pytest.approx(5.0, rel=1e-9)
    assert lo <= 5.0 <= hi


def test_range_missing_dimension():
    with pytest.raises(MissingDimension):
        linexpr_range(expr({"z": 1.0}), Box(("x",), (0.0,), (1.0,)))


def test_range_brackets_samples():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = rng.integers(1, 4)
        dims = tuple(f"d{i}" for i in range(n))
        lo = rng.uniform(-5, 5, n)
        hi = lo + rng.uniform(0, 5, n)
        box = Box(dims, tuple(lo), tuple(hi))
        e = expr({d: float(c) for d, c in zip(dims, rng.uniform(-3, 3, n))},
                 float(rng.uniform(-3, 3)))
        mn, mx = linexpr_range(e, box)
        for _ in range(20):
            point = {d: float(rng.uniform(a, b))
                     for d, a, b in zip(dims, lo, hi)}
            v = e.evaluate(point)
            assert mn <= v <= mx


def _case_study_region(vt, event="qualified_and_sensitive"):
    paths = enumerate_paths(vt)
    region = build_event_region(paths, event, vt)
    return bind_region(region.components[0].region, region.dims)


def test_classify_case_study_full_box(case_study):
    """Box inside hire-and-minority: ethnicity clears 10, the *drawn*
    colRank stays at most 0 so the +5 group shift still lands within the
    top-5 guard.  Derived by brute force below."""
    bound = _case_study_region(case_study)
    box = Box(("ethnicity", "colRank", "yExp"),
              (20.0, -5.0, 0.0), (30.0, -1.0, 1.0))
    # independent justification: direct interpretation on a grid over the box
    for e, c, y in itertools.product(
            np.linspace(20, 30, 5), np.linspace(-5, -1, 5), np.linspace(0, 1, 5)):
        ret, sens = interpret_point(
            case_study, {"ethnicity": e, "colRank": c, "yExp": y})
        assert ret and sens
    assert classify(box, bound) is Classification.FULL


def test_classify_case_study_empty_box(case_study):
    bound = _case_study_region(case_study)
    box = Box(("ethnicity", "colRank", "yExp"),
              (-5.0, 0.0, 0.0), (5.0, 4.0, 1.0))
    assert classify(box, bound) is Classification.EMPTY


def test_classify_straddling_box_is_mixed(case_study):
    bound = _case_study_region(case_study)
    box = Box(("ethnicity", "colRank", "yExp"),
              (0.0, -5.0, 0.0), (20.0, -1.0, 1.0))
    assert classify(box, bound) is Classification.MIXED


def test_classify_dimension_mismatch(case_study):
    bound = _case_study_region(case_study)
    with pytest.raises(MissingDimension):
        classify(Box(("a",), (0.0,), (1.0,)), bound)


def test_bisect_midpoint():
    left, right = bisect(Box(("x",), (0.0,), (4.0,)), 0)
    assert left.lo == (0.0,) and left.hi == (2.0,)
    assert right.lo == (2.0,) and right.hi == (4.0,)


def test_bisect_other_dims_unchanged():
    box = Box(("x", "y"), (0.0, 1.0), (4.0, 3.0))
    left, right = bisect(box, 1)
    assert left.hi == (4.0, 2.0)
    assert right.lo == (0.0, 2.0)
    assert left.lo == box.lo and right.hi == box.hi


def test_bisect_degenerate():
    with pytest.raises(DegenerateDimension):
        bisect(Box(("x",), (1.0,), (1.0,)), 0)


# ---------------------------------------------------------------------------
# randomized soundness properties

def _random_region(rng, dims):
    n_disj = int(rng.integers(1, 4))
    region = []
    for _ in range(n_disj):
        n_atoms = int(rng.integers(1, 4))
        conj = []
        for _ in range(n_atoms):
            coeffs = tuple(float(c) for c in rng.uniform(-2, 2, len(dims)))
            rel = (Relation.LE, Relation.LT, Relation.GE, Relation.GT)[
                int(rng.integers(0, 4))]
            conj.append(BoundAtom(coeffs, float(rng.uniform(-2, 2)), rel))
        region.append(tuple(conj))
    return tuple(region)


def _point_in_region(region, point, strict_relax=1e-12):
    def atom_holds(a):
        v = sum(c * x for c, x in zip(a.coeffs, point)) + a.const
        if a.rel in (Relation.LE, Relation.LT):
            return v <= strict_relax
        if a.rel in (Relation.GE, Relation.GT):
            return v >= -strict_relax
        return abs(v) <= strict_relax
    return any(all(atom_holds(a) for a in conj) for conj in region)


def test_full_and_empty_are_sound():
    rng = np.random.default_rng(17)
    dims = ("a", "b")
    decided = 0
    while decided < 60:
        region = _random_region(rng, dims)
        lo = rng.uniform(-2, 2, 2)
        hi = lo + rng.uniform(0.01, 2, 2)
        box = Box(dims, tuple(lo), tuple(hi))
        cls = classify(box, region)
        if cls is Classification.MIXED:
            continue
        decided += 1
        for _ in range(200):
            point = tuple(float(rng.uniform(a, b)) for a, b in zip(lo, hi))
            inside = _point_in_region(region, point)
            if cls is Classification.FULL:
                assert inside
            else:
                assert not inside


def test_classify_antitone_under_shrinking():
    rng = np.random.default_rng(23)
    dims = ("a", "b", "c")
    for _ in range(300):
        region = _random_region(rng, dims)
        lo = rng.uniform(-2, 2, 3)
        hi = lo + rng.uniform(0.01, 2, 3)
        parent = Box(dims, tuple(lo), tuple(hi))
        cls = classify(parent, region)
        # random sub-box
        slo = lo + rng.uniform(0, 0.4, 3) * (hi - lo)
        shi = hi - rng.uniform(0, 0.4, 3) * (hi - lo)
        shi = np.maximum(shi, slo)
        child = Box(dims, tuple(slo), tuple(shi))
        sub = classify(child, region)
        if cls is Classification.FULL:
            assert sub is Classification.FULL
        elif cls is Classification.EMPTY:
            assert sub is Classification.EMPTY


def test_bisect_children_not_less_decided():
    rng = np.random.default_rng(29)
    dims = ("a", "b")
    for _ in range(300):
        region = _random_region(rng, dims)
        lo = rng.uniform(-2, 2, 2)
        hi = lo + rng.uniform(0.01, 2, 2)
        box = Box(dims, tuple(lo), tuple(hi))
        cls = classify(box, region)
        if cls is Classification.MIXED:
            continue
        for d in range(2):
            for child in bisect(box, d):
                assert classify(child, region) is cls


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=60, deadline=None)
def test_full_box_membership_property(seed):
    rng = np.random.default_rng(seed)
    dims = ("a", "b")
    region = _random_region(rng, dims)
    lo = rng.uniform(-2, 2, 2)
    hi = lo + rng.uniform(0.01, 2, 2)
    box = Box(dims, tuple(lo), tuple(hi))
    if classify(box, region) is Classification.FULL:
        for _ in range(50):
            point = tuple(float(rng.uniform(a, b)) for a, b in zip(lo, hi))
            assert _point_in_region(region, point)
