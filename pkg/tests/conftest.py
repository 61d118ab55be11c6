import os

import numpy as np
import pytest
from hypothesis import settings

from metasynth.core import Exemplar, normalize
from metasynth.embedding import HashingEmbedder
from metasynth.fixtures import build_catalog

settings.register_profile("default", deadline=None, max_examples=100)
settings.register_profile("ci", deadline=None, max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def embedder():
    return HashingEmbedder()


@pytest.fixture(scope="session")
def catalog():
    return build_catalog()


def unit(vec):
    return normalize(np.asarray(vec, dtype=np.float64))


def make_exemplar(vec, rank=1, eid=None, query="q", url=None, title="t", description="d"):
    url = url or f"https://example.com/{eid if eid is not None else id(vec)}"
    return Exemplar(query, url, title, description, rank, unit(vec), eid)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
