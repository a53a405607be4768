"""Path enumeration and event-region construction."""

import numpy as np
import pytest

from conftest import draw_concrete, near_boundary, path_matches, vtask_for
from fairbox.dsl import parse_source, validate
from fairbox.dsl.nodes import Relation
from fairbox.mc import interpret_point
from fairbox.symexec import (
    EVENTS,
    PathExplosion,
    build_event_region,
    dump_paths,
    enumerate_paths,
)

FIXTURES = ["casestudy.fg", "const_true.fg", "halfspace.fg", "symmetric.fg",
            "bernoulli.fg", "disjunctive.fg", "coinflips.fg"]


def test_case_study_has_six_paths(case_study):
    paths = enumerate_paths(case_study)
    assert len(paths) == 6  # 2 model branches x 3 program branches
    assert sum(p.return_value for p in paths) == 4
    for p in paths:
        assert len(p.constraints) <= 3


def test_constant_true_single_path():
    vt = vtask_for("const_true.fg")
    paths = enumerate_paths(vt)
    assert len(paths) == 1
    assert paths[0].constraints == ()
    assert paths[0].return_value is True


def _nested(depth: int) -> str:
    lines = ["define m()"]
    for i in range(depth):
        lines.append(f"  x{i} ~ gauss(0, 1)")
    lines.append(f"  return {', '.join(f'x{i}' for i in range(depth))}")
    prog = [f"define d({', '.join(f'x{i}' for i in range(depth))})"]

    def nest(i, pad):
        if i == depth:
            prog.append(f"{pad}q <- true")
            return
        prog.append(f"{pad}if (x{i} > 0)")
        nest(i + 1, pad + "  ")
        prog.append(f"{pad}else")
        nest(i + 1, pad + "  ")

    nest(0, "  ")
    prog.append("  return q")
    spec = "spec { sensitive: x0 > 0; qualified: q; epsilon: 0.1; }"
    return "\n".join(lines) + "\n\n" + "\n".join(prog) + "\n\n" + spec + "\n"


@pytest.mark.parametrize("depth", [1, 3, 5])
def test_nested_if_path_count(depth):
    vt = validate(parse_source(_nested(depth)))
    assert len(enumerate_paths(vt)) == 2 ** depth


def test_path_explosion_cap():
    vt = validate(parse_source(_nested(6)))
    with pytest.raises(PathExplosion):
        enumerate_paths(vt, max_paths=16)


@pytest.mark.parametrize("name", FIXTURES)
def test_exhaustive_and_exclusive(name):
    """Exactly one path's constraints hold at sampled points (boundaries
    retried), per Bernoulli assignment."""
    vt = vtask_for(name)
    paths = enumerate_paths(vt)
    rng = np.random.default_rng(hash(name) % 2 ** 32)
    checked = 0
    while checked < 1000:
        values, bits = draw_concrete(vt, rng)
        if any(near_boundary(p, values) for p in paths):
            continue
        matches = [p for p in paths if path_matches(p, values, bits)]
        assert len(matches) == 1, (name, values, bits, len(matches))
        checked += 1


@pytest.mark.parametrize("name", FIXTURES)
def test_differential_against_interpreter(name):
    """The matched path's return value agrees with direct interpretation."""
    vt = vtask_for(name)
    paths = enumerate_paths(vt)
    rng = np.random.default_rng(hash(name) % 2 ** 31)
    checked = 0
    while checked < 500:
        values, bits = draw_concrete(vt, rng)
        if any(near_boundary(p, values) for p in paths):
            continue
        matches = [p for p in paths if path_matches(p, values, bits)]
        assert len(matches) == 1
        ret, _ = interpret_point(vt, values)
        assert ret == matches[0].return_value
        checked += 1


def test_case_study_sensitive_region_is_single_atom(case_study):
    paths = enumerate_paths(case_study)
    region = build_event_region(paths, "sensitive", case_study)
    assert len(region.components) == 1
    comp = region.components[0]
    assert comp.weight == 1.0
    assert len(comp.region) == 1
    (atom,), = comp.region
    assert atom.lhs.coefficients() == {"ethnicity": 1.0}
    assert atom.lhs.const == -10.0
    assert atom.rel is Relation.GT


def test_case_study_qs_disjuncts_all_mention_sensitive_atom(case_study):
    paths = enumerate_paths(case_study)
    region = build_event_region(paths, "qualified_and_sensitive", case_study)
    for disjunct in region.components[0].region:
        keys = {a.key() for a in disjunct}
        assert ((("ethnicity", 1.0),), -10.0, Relation.GT) in keys


def test_constant_false_gives_empty_region():
    vt = vtask_for("const_false.fg")
    paths = enumerate_paths(vt)
    region = build_event_region(paths, "qualified_and_sensitive", vt)
    assert region.components[0].region == ()


def test_bernoulli_components_weights_sum_to_one():
    vt = vtask_for("bernoulli.fg")
    paths = enumerate_paths(vt)
    for event in EVENTS:
        region = build_event_region(paths, event, vt)
        total = sum(c.weight for c in region.components)
        assert abs(total - 1.0) <= 1e-12
        assert len(region.components) == 2  # one Bernoulli site


def test_bernoulli_sensitive_region_is_trivial_per_component():
    # sensitive: grp == 1 resolves to everything/nothing per component
    vt = vtask_for("bernoulli.fg")
    paths = enumerate_paths(vt)
    region = build_event_region(paths, "sensitive", vt)
    by_key = {c.key: c for c in region.components}
    site = vt.bernoulli_sites[0].index
    assert by_key[((site, 1),)].region == ((),)  # whole space
    assert by_key[((site, 0),)].region == ()     # empty


@pytest.mark.parametrize("name", FIXTURES)
def test_event_partition_covers_sensitive(name):
    """(q&s) union (not-q&s) covers region(sensitive) pointwise."""
    vt = vtask_for(name)
    paths = enumerate_paths(vt)
    r_s = build_event_region(paths, "sensitive", vt)
    r_qs = build_event_region(paths, "qualified_and_sensitive", vt)
    r_ns = build_event_region(paths, "not_qualified_and_sensitive", vt)

    def holds(region, key, values):
        comp = next(c for c in region.components if c.key == key)
        return any(all(a.holds(values) for a in disjunct)
                   for disjunct in comp.region)

    relevant = tuple(s for s, _ in r_s.components[0].key)
    rng = np.random.default_rng(hash(name) % 2 ** 30)
    checked = 0
    while checked < 300:
        values, bits = draw_concrete(vt, rng)
        if any(near_boundary(p, values) for p in paths):
            continue
        key = tuple((s, bits[s]) for s in relevant)
        in_s = holds(r_s, key, values)
        in_parts = holds(r_qs, key, values) or holds(r_ns, key, values)
        assert in_s == in_parts
        checked += 1


def test_dump_format(case_study):
    lines = dump_paths(case_study, enumerate_paths(case_study))
    assert len(lines) == 6
    assert all("⇒ return" in line for line in lines)
    assert all(line.startswith("[component w=1]") for line in lines)
    assert any("∧" in line for line in lines)
