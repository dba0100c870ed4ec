import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mock_server import MockLLMServer

from honest.embeddings import EmbeddingProviderConfig, ProviderKind


@pytest.fixture(scope="session")
def local_provider():
    return EmbeddingProviderConfig(kind=ProviderKind.LOCAL_HASHED, dimension=128)


@pytest.fixture(scope="session")
def mock_server():
    server = MockLLMServer().start()
    yield server
    server.stop()
