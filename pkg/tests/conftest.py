"""Shared fixtures plus the acceptance-criteria summary table."""

import math

import pytest

import capflow as cf

CRITERION_LINES = []


def record_criterion(cid: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    CRITERION_LINES.append(f"[{status}] {cid}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in sorted(CRITERION_LINES):
        terminalreporter.write_line(line)


THETA3 = math.pi / 3.0


@pytest.fixture(scope="session")
def grid_1d_101():
    return cf.build_grid(1, THETA3, 101, cf.GridMode.FULL1D)


@pytest.fixture(scope="session")
def grid_1d_201():
    return cf.build_grid(1, THETA3, 201, cf.GridMode.FULL1D)


@pytest.fixture(scope="session")
def grid_axi_101():
    return cf.build_grid(2, THETA3, 101, cf.GridMode.AXISYMMETRIC)
