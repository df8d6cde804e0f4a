import pytest

from cxgcorpus.matcher import build_index, match_corpus

from helpers import make_desk


@pytest.fixture(scope="session")
def desk():
    return make_desk()


@pytest.fixture(scope="session")
def desk_table(desk):
    index = build_index(desk.inventory)
    return match_corpus(index, desk.sentences, max_gap=1)
