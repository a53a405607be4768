import pathlib

import numpy as np
import pytest

from fairbox.dsl import parse_source, validate
from fairbox.dsl.nodes import Bernoulli

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

# pinned by the high-precision oracle (mpmath quadrature agrees with mp.ncdf
# to 25 digits; see test_normal for the live anchor)
PHI_1 = 0.8413447460685429
PHI_MINUS_8 = 6.220960574271784e-16
UNIT_SQUARE_MASS = 0.1165162356685981      # (Phi(1) - Phi(0))^2
SYM_SQUARE_MASS = 0.4660649426743923       # (Phi(1) - Phi(-1))^2

# case-study event probabilities, pinned by 1-D quadrature over the exact
# composition (see test_acceptance for the Monte Carlo cross-pin)
CASE_P = {
    "qualified_and_sensitive": 0.014264277391018688,
    "qualified_and_not_sensitive": 0.15624969118176437,
    "sensitive": 0.15865525393145705,
    "not_sensitive": 0.8413447460685429,
}
CASE_RATIO = 0.48411678072022236


def load(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def vtask_for(name: str):
    return validate(parse_source(load(name)))


@pytest.fixture(scope="session")
def case_study():
    return vtask_for("casestudy.fg")


def draw_concrete(vtask, rng: np.random.Generator):
    """One concrete base vector: Gaussian values by base name plus Bernoulli
    bits by site index."""
    values = {}
    bits = {}
    for site in vtask.draw_sites:
        if isinstance(site.dist, Bernoulli):
            bits[site.index] = int(rng.random() < site.dist.p)
            values[site.base_name] = float(bits[site.index])
        else:
            values[site.base_name] = float(
                rng.normal(site.dist.mean, site.dist.stddev))
    return values, bits


def path_matches(path, values, bits) -> bool:
    if any(bits.get(site) != bit for site, bit in path.bernoulli_choices):
        return False
    return all(atom.holds(values) for atom in path.constraints)


def near_boundary(path, values, tol: float = 1e-9) -> bool:
    return any(abs(atom.lhs.evaluate(values)) < tol for atom in path.constraints)
