import pytest

from gscsim.scene_source import load_bundled_corpus


@pytest.fixture(scope="session")
def corpus():
    return load_bundled_corpus()


@pytest.fixture(scope="session")
def kb(corpus):
    return corpus.kb
