import sys
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")


@pytest.fixture
def scenarios_dir():
    return Path(__file__).resolve().parents[1] / "src" / "tractionid" / "scenarios"


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(verdicts):
        terminalreporter.write_line(verdicts[criterion])
