import os
import sys

os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
sys.path.insert(0, os.path.dirname(__file__))

from hypothesis import settings  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

import pytest  # noqa: E402

_REPORT_KEY = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_report(request):
    """criterion label -> list of verdicts, printed in the terminal summary."""
    return request.config.stash.setdefault(_REPORT_KEY, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    report = config.stash.get(_REPORT_KEY, None)
    if not report:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(report, key=lambda s: int(s)):
        verdicts = report[label]
        failed = [v.name for v in verdicts if not v.informational and not v.passed]
        status = "PASS" if not failed else "FAIL (" + ", ".join(failed) + ")"
        terminalreporter.write_line(f"criterion {label}: {status}")
    for label in sorted(report, key=lambda s: int(s)):
        for v in report[label]:
            terminalreporter.write_line("  " + v.line())
