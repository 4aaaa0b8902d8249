import numpy as np
import pytest

from config import DEFAULT_POLICY
from models import StinespringData
from schemas import GeneratorSpec
from services.algebra import SIGMA_X, SIGMA_Z, identity_representation, pauli_algebra
from services.genlab import InstanceGenerator


@pytest.fixture
def policy():
    return DEFAULT_POLICY


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def generator():
    return InstanceGenerator()


@pytest.fixture
def pauli():
    return pauli_algebra()


@pytest.fixture
def identity_dilation(pauli):
    """phi(a) = a on M_2, presented by the Pauli generators."""
    eye = np.eye(2, dtype=complex)
    return StinespringData((identity_representation(pauli),), (eye, eye))


@pytest.fixture
def sigma_x():
    return SIGMA_X.copy()


@pytest.fixture
def sigma_z():
    return SIGMA_Z.copy()


@pytest.fixture
def make_spec():
    def random_spec(seed, **overrides):
        fields = dict(
            kind="random_instance",
            seed=seed,
            k=2,
            slot_algebra_dims=[2, 2],
            multiplicities=[2, 2],
            dim_g=2,
            dim_h=2,
        )
        fields.update(overrides)
        return GeneratorSpec(**fields)

    return random_spec
