import json

import factory.random
import numpy as np
import pytest

from gablab.gabor import delta_window
from gablab.group import Side, annihilator, enumerate_subgroups, make_group, span_subgroup
from .factories import ExperimentSpecFactory


@pytest.fixture(autouse=True)
def reseed_factories():
    """Keep Faker-drawn seeds identical from run to run."""
    factory.random.reseed_random('gablab')


@pytest.fixture
def z2():
    """Fixture for the group Z2."""
    return make_group([2])


@pytest.fixture
def z4():
    """Fixture for the group Z4."""
    return make_group([4])


@pytest.fixture
def z2x2():
    """Fixture for the Klein four-group."""
    return make_group([2, 2])


@pytest.fixture
def z12():
    """Fixture for the group Z12."""
    return make_group([12])


@pytest.fixture
def z2_full(z2):
    """
    Fixture for the worked Z2 case: g = delta_0 on Lambda = G, Gamma = G^.
    Returns (g, Lambda, Gamma).
    """
    return (
        delta_window(z2),
        span_subgroup(z2, Side.PRIMAL, [[1]]),
        span_subgroup(z2, Side.DUAL, [[1]]),
    )


@pytest.fixture
def z4_half(z4):
    """Fixture for Lambda = {0, 2} in Z4 and its annihilator."""
    lam = span_subgroup(z4, Side.PRIMAL, [[2]])
    return lam, annihilator(lam)


@pytest.fixture
def lattice_pairs():
    """Fixture returning every (Lambda, Gamma) pair of a group."""
    def pairs(group):
        return [
            (lam, gam)
            for lam in enumerate_subgroups(group, Side.PRIMAL)
            for gam in enumerate_subgroups(group, Side.DUAL)
        ]
    return pairs


@pytest.fixture
def write_spec(tmp_path):
    """Fixture writing an experiment spec to a temporary file."""
    def write(name='spec.json', raw=None, **overrides):
        path = tmp_path / name
        path.write_text(raw if raw is not None else json.dumps(ExperimentSpecFactory(**overrides)))
        return path
    return write


@pytest.fixture
def rng():
    """Fixture for a seeded numpy generator."""
    return np.random.default_rng(20240601)
