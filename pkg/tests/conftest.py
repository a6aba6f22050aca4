import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, part): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    number, part = mark.args
    details = [v for k, v in item.user_properties if k == "detail"]
    _OUTCOMES.setdefault(number, {})[part] = (rep.passed, "; ".join(details))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        parts = _OUTCOMES[number]
        ok = all(p for p, _ in parts.values())
        info = " | ".join(
            f"{name or 'check'} {'pass' if p else 'FAIL'}" + (f": {d}" if d else "") for name, (p, d) in sorted(parts.items())
        )
        tr.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  [{info}]")
