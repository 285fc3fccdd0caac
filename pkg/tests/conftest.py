import json
import math
from pathlib import Path

import pytest

from tritronquee import bvp_solver as bvp

ORACLES = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


def cplx(pair):
    return complex(float(pair[0]), float(pair[1]))


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


@pytest.fixture(scope="session")
def u0_t0():
    """U0 on [-12, 12] at t=0, Nc=512."""
    return bvp.solve_line(bvp.preset_domain("U0-real", t=0.0, Nc=512))


@pytest.fixture(scope="session")
def u0_t0_256():
    return bvp.solve_line(bvp.preset_domain("U0-real", t=0.0, Nc=256))


THREE_PI = 3 * math.pi


# --- acceptance report --------------------------------------------------------------
# tests marked ``acceptance(n)`` record a detail string in user_properties; the
# terminal summary prints one line per criterion.

_ACCEPT: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    props = dict(report.user_properties)
    n = props.get("criterion")
    if n is None:
        return
    _ACCEPT[n] = (report.outcome == "passed", props.get("detail", report.outcome))


def pytest_runtest_makereport(item, call):
    m = item.get_closest_marker("acceptance")
    if m is not None and ("criterion", m.args[0]) not in item.user_properties:
        item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPT:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPT):
        ok, detail = _ACCEPT[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
