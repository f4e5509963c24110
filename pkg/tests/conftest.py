import pytest

from spectral_transfer.generators import generate_sbm, reference_params
from spectral_transfer.graph import DomainSpec, build_graph

from _helpers import A, B, C, D, G4_EDGES


@pytest.fixture(scope="session")
def g4():
    return build_graph(G4_EDGES)


@pytest.fixture(scope="session")
def g4_domain():
    return DomainSpec(((A, B), (C, D)), 1, 4)


@pytest.fixture(scope="session")
def reference():
    return generate_sbm(reference_params())


@pytest.fixture(scope="session")
def small_reference():
    # clusters of 10: exact conductance is available
    return generate_sbm(reference_params(cluster_size=10, q_same=0.09, q_cross=0.005, q_other=0.005))
