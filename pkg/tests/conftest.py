import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_VERDICTS = {}


def record(criterion: int, ok: bool, detail: str):
    """Store and print a one-line acceptance verdict."""
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    _VERDICTS[criterion] = line
    print(line)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow") or os.environ.get("RABI_DPT_SLOW", "") not in ("", "0"):
        return
    skip = pytest.mark.skip(reason="slow; use --runslow or RABI_DPT_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[k])
    missing = [k for k in range(1, 13) if k not in _VERDICTS]
    for k in missing:
        terminalreporter.write_line(f"criterion {k:2d}: NOT RUN (skipped or errored)")
