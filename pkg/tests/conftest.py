from pathlib import Path

import pytest

from analysis.temporal import read_matrix
from core.events import write_events
from core.series import read_series

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def v1_series():
    return read_series(FIXTURES / "v1_table1.csv")


@pytest.fixture(scope="session")
def v2_series():
    return read_series(FIXTURES / "v2_table1.csv")


@pytest.fixture(scope="session")
def v1_matrix():
    return read_matrix(FIXTURES / "v1_table2.csv")


@pytest.fixture(scope="session")
def v1_events(v1_series, v1_matrix):
    """Event log whose aggregates match the V1 tables (31 campaign days)."""
    from analysis.simulator import reconstruct_campaign
    return reconstruct_campaign(v1_series, v1_matrix, total_periods=31)


@pytest.fixture
def v1_events_file(tmp_path, v1_events) -> Path:
    path = tmp_path / "v1_events.csv"
    write_events(v1_events, path, comments=v1_events.comments)
    return path


@pytest.fixture
def write_csv(tmp_path):
    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write
