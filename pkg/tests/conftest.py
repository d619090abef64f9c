import numpy as np
import pytest

_CRITERIA = {}


def record_criterion(number, title, ok, detail=""):
    """Store an acceptance verdict for the terminal summary, then assert it."""
    _CRITERIA[number] = (title, bool(ok), detail)
    assert ok, f"criterion {number} ({title}) failed: {detail}"


@pytest.fixture
def criterion():
    return record_criterion


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[number]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {number}. {title} -- {detail}")
