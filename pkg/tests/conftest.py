import numpy as np
import pytest

from canonical_ppt.canonical import assemble_rho, diagonal_form, sample_canonical
from canonical_ppt.config import Tolerances
from canonical_ppt.multilinear import SystemShape


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tolerances() -> Tolerances:
    return Tolerances()


@pytest.fixture
def qubit_pair() -> SystemShape:
    return SystemShape(front_dims=(2,), tail_dim=2)


@pytest.fixture
def diagonal_cf(qubit_pair):
    """D = diag(2, 3), F = diag(1, 4) on (2;2)."""
    return diagonal_form(qubit_pair, {(1, 1): [2, 3]}, [1, 4])


@pytest.fixture
def make_canonical_state():
    def build(dims, seed=0, **options):
        shape = SystemShape.from_dims(dims)
        cf = sample_canonical(shape, np.random.default_rng(seed), **options)
        return cf, assemble_rho(cf)

    return build

