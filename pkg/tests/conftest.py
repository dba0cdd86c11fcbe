"""Shared fixtures: the critical angles are computed once per session."""

import pytest

from bolzaspec.params import ThetaParam
from bolzaspec.periods import solve_critical_thetas


@pytest.fixture(scope="session")
def critical():
    return solve_critical_thetas()


@pytest.fixture(scope="session")
def theta1(critical):
    return ThetaParam(critical.theta1)


@pytest.fixture(scope="session")
def theta2(critical):
    return ThetaParam(critical.theta2)
