import numpy as np
import pytest

from jtenso.model import ModelParams, find_equilibrium

EQ_GUESS = (-2.5, -0.8, 1.6)


@pytest.fixture(scope="session")
def p_ref() -> ModelParams:
    return ModelParams.reference()


@pytest.fixture(scope="session")
def eq_ref(p_ref):
    return find_equilibrium(p_ref, EQ_GUESS)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260816)
