from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import settings

from cpl.parser import parse_scene

settings.register_profile("suite", deadline=None, max_examples=60,
                          derandomize=True)
settings.load_profile("suite")

REPO_ROOT = Path(__file__).resolve().parents[1]
SCENES = REPO_ROOT / "scenes"


@pytest.fixture(scope="session")
def cooking_path() -> Path:
    return SCENES / "cooking.cpl"


@pytest.fixture(scope="session")
def cooking_scene(cooking_path):
    result = parse_scene(cooking_path.read_text(encoding="utf-8"))
    assert result.scene is not None, result.diagnostics
    return result.scene


@pytest.fixture(scope="session")
def scenes_dir() -> Path:
    return SCENES


# One pass/fail line per acceptance criterion at the end of the run.
_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _ACCEPTANCE[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE):
        outcome = _ACCEPTANCE[nodeid]
        label = nodeid.split("::")[-1]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{label}: {verdict}")
