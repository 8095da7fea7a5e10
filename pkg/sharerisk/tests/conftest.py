import pathlib

import pytest

import sharerisk
import sharerisk.io


@pytest.fixture
def tmp_cwd(tmp_path, monkeypatch) -> pathlib.Path:
    monkeypatch.chdir(tmp_path)
    yield tmp_path


@pytest.fixture
def example_path() -> pathlib.Path:
    return sharerisk.io.EXAMPLE_SCENARIO


@pytest.fixture
def james_alec(example_path) -> sharerisk.Scenario:
    """Returns the bundled scenario in which BI shares a redacted report with James
    (share) and Alec (withhold)."""
    return sharerisk.load_scenario(example_path)
