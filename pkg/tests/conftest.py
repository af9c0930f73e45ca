"""Shared fixtures and the acceptance-criteria result printer."""

from __future__ import annotations

import numpy as np
import pytest

from sbdrift.estimator import FloorSpec
from sbdrift.models import make_law
from sbdrift.truth import IntervalSpec, evaluation_grid, preflight

_CRITERION_LINES: list[tuple[int, str, bool, str]] = []


def record_criterion(index: int, label: str, passed: bool, detail: str) -> None:
    _CRITERION_LINES.append((index, label, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for idx, label, ok, detail in sorted(_CRITERION_LINES):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[criterion {idx}] {status} {label}: {detail}")


@pytest.fixture(scope="session")
def interval() -> IntervalSpec:
    return IntervalSpec()


@pytest.fixture(scope="session")
def xgrid_1d() -> np.ndarray:
    return evaluation_grid(-2.0, 2.0, 200, 1)


@pytest.fixture(scope="session")
def gg1_law():
    return make_law("GG1")


@pytest.fixture(scope="session")
def mm1_law():
    return make_law("MM1")


@pytest.fixture(scope="session")
def gg1_preflight(gg1_law, interval, xgrid_1d):
    return preflight(gg1_law, interval, 0.6, np.array([0.0]), xgrid_1d)


@pytest.fixture(scope="session")
def mm1_preflight(mm1_law, interval, xgrid_1d):
    return preflight(mm1_law, interval, 0.6, np.array([0.8]), xgrid_1d)


@pytest.fixture(scope="session")
def gg1_floors(gg1_preflight) -> FloorSpec:
    return FloorSpec(
        f_min=0.5 * gg1_preflight.min_f_grid, d_min=0.5 * gg1_preflight.min_dstar
    )


@pytest.fixture(scope="session")
def mm1_floors(mm1_preflight) -> FloorSpec:
    return FloorSpec(
        f_min=0.5 * mm1_preflight.min_f_grid, d_min=0.5 * mm1_preflight.min_dstar
    )
