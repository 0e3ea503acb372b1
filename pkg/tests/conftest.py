import numpy as np
import pytest

from blimpsim.vehicle import load_vehicle, reference_blimp_document


@pytest.fixture(scope="session")
def reference_document():
    return reference_blimp_document()


@pytest.fixture()
def reference_vehicle(reference_document):
    return load_vehicle(reference_document)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
