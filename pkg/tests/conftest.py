import numpy as np
import pytest

from feaskit import AffineOracle, CfpInstance, Ellipsoid

ACCEPTANCE = {}


@pytest.fixture
def two_halfspaces():
    """n=1, f1(x) = x - 1, f2(x) = -x - 1; feasible set [-1, 1]."""
    return CfpInstance([AffineOracle([1.0], 1.0), AffineOracle([-1.0], 1.0)], slater_point=[0.0], id="two-halfspaces")


@pytest.fixture
def unit_ball():
    return CfpInstance([Ellipsoid(np.eye(2), np.zeros(2), 1.0)], slater_point=np.zeros(2), id="unit-ball")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" in report.nodeid and name.startswith("test_criterion_"):
        ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s.split("_")[2])):
        outcome = ACCEPTANCE[name]
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}")
