import numpy as np
import pytest

from wptsim.harvester import HarvestTrace


@pytest.fixture
def constant_harvest():
    def make(p_eh, seconds, rate=250.0, v_eh=2.0):
        n = int(round(seconds * rate))
        return HarvestTrace(rate, np.full(n, p_eh), np.full(n, v_eh))
    return make


# ---------------------------------------------------------------- acceptance summary

_CRITERIA = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    n = marker.args[0]
    passed = call.excinfo is None
    detail = "; ".join(v for k, v in item.user_properties if k == "detail")
    ok, notes = _CRITERIA.get(n, (True, []))
    _CRITERIA[n] = (ok and passed, notes + ([detail] if detail else []))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, notes = _CRITERIA[n]
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}"
        if notes:
            line += "  (" + "; ".join(notes) + ")"
        terminalreporter.write_line(line)
