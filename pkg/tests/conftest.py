import pytest
from fastapi.testclient import TestClient

from roughlab.main import app
from roughlab.services import registry
from roughlab.services.spec_dsl import parse

FIXTURE_SOURCES = {
    "thm2.1": registry.THM21_SOURCE,
    "ex2.5": registry.EX25_SOURCE,
    "ex3.3": registry.EX33_SOURCE,
    "ex3.5": registry.EX35_SOURCE,
    "ex3.12": registry.ex312_source(8),
    "prop1.7": registry.PROP17_SOURCE,
    "ias": registry.IAS_SOURCE,
    "quarter": registry.QUARTER_SOURCE,
    "split": registry.SPLIT_SOURCE,
}


@pytest.fixture(scope="session")
def docs():
    """Every registry fixture, parsed once."""
    return {name: parse(source, registry.FIXTURE_HORIZON) for name, source in FIXTURE_SOURCES.items()}


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


@pytest.fixture
def spec_file(tmp_path):
    """Write .rcl text to a temporary file and return its path as a string."""

    def write(text: str, name: str = "spec.rcl") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write
