import json

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from drugscreen.lexicon import default_lexicon
from drugscreen.toydata import load_toy_vectors, make_toy_records

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def toy_table():
    return load_toy_vectors()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def raw_jsonl(tmp_path):
    path = tmp_path / "raw.jsonl"
    path.write_text("".join(json.dumps(r) + "\n" for r in make_toy_records(120, seed=3)))
    return path


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
