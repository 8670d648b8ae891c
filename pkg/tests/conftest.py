import re

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

_criteria: dict[int, tuple[str, str, float]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    match = re.match(r"test_criterion_(\d+)_(\w+)", item.name)
    if match and item.get_closest_marker("acceptance"):
        number = int(match.group(1))
        if rep.when == "call" or (rep.when == "setup" and rep.failed):
            _criteria[number] = ("PASS" if rep.passed else "FAIL", match.group(2), rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, name, seconds = _criteria[number]
        terminalreporter.write_line(f"{status}  criterion {number:2d}  {name.replace('_', ' ')}  ({seconds:.2f} s)")
