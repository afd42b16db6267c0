"""
Shared fixtures. Point proofs are cheap and computed once per session; the
manifold and connection proofs behind the slow fixtures run only when a test
marked slow asks for them.
"""

import pytest

from dependencies.services import get_manifold_service, get_pipeline_service, get_point_proof_service
from services.manifold_service import select_eigenpairs
from services.storage import FilesystemStorage
from tests.dependencies import get_test_settings, test_settings, test_settings_with_overrides  # noqa: F401


@pytest.fixture
def storage(test_settings):
    """Filesystem storage in the temporary output directory."""
    return FilesystemStorage(test_settings.output.out_dir)


@pytest.fixture(scope="session")
def point_certificates():
    """Certified equilibria and eigenpairs at the default parameters."""
    return get_point_proof_service(get_test_settings()).run()


@pytest.fixture(scope="session")
def equilibria(point_certificates):
    return {c.name: c for c in point_certificates[0]}


@pytest.fixture(scope="session")
def eigenpairs(point_certificates):
    return point_certificates[1]


@pytest.fixture(scope="session")
def manifold_data(equilibria, eigenpairs):
    """Inputs of the unstable manifold of c1 and the stable manifold of c0."""
    return {
        "unstable": select_eigenpairs("unstable", equilibria["c1"], eigenpairs),
        "stable": select_eigenpairs("stable", equilibria["c0"], eigenpairs),
    }


@pytest.fixture(scope="session")
def manifold_certificates(manifold_data):
    """Both manifold proofs at the default configuration (scales tuned)."""
    service = get_manifold_service(get_test_settings())
    return {side: service.validate(data) for side, data in manifold_data.items()}


@pytest.fixture(scope="session")
def proof_run(tmp_path_factory):
    """Complete pipeline: tune every "auto" value, then prove the connection."""
    out_dir = tmp_path_factory.mktemp("proof_run")
    config = get_test_settings(output={"out_dir": str(out_dir), "n_plot": 200})
    pipeline = get_pipeline_service(config)
    pipeline.tune()
    pipeline.run(["connection"])
    return pipeline
