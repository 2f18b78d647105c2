import numpy as np
import pytest

from pesinlab.systems import CatMap, HenonMap, PerturbedCatMap, StandardMap

LOG_LAM = float(np.log((3.0 + np.sqrt(5.0)) / 2.0))  # 0.9624236501192069


@pytest.fixture(scope="session")
def cat():
    return CatMap()


@pytest.fixture(scope="session")
def perturbed_cat():
    return PerturbedCatMap(epsilon=0.05)


@pytest.fixture(scope="session")
def henon():
    return HenonMap()


@pytest.fixture(scope="session")
def standard_zero():
    return StandardMap(k=0.0)
