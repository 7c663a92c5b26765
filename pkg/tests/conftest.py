"""Shared fixtures.

Everything expensive (beta-coefficient fits, the l=1/2 high-resolution
table) is session-scoped so the full suite pays for each fit once.
"""
import numpy as np
import pytest

from transmute.coeffs import compute_beta
from transmute.oracle import ProblemSetup


def q_harmonic(x):
    return np.asarray(x, dtype=float) ** 2


def q_zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@pytest.fixture(scope="session")
def harmonic_setups():
    """q(x) = x^2 on (0, pi] for l = 0, 1, 2."""
    return {
        l: ProblemSetup(l=float(l), b=np.pi, q=q_harmonic) for l in (0, 1, 2)
    }


@pytest.fixture(scope="session")
def zero_setups():
    return {
        l: ProblemSetup(l=float(l), b=np.pi, q=q_zero) for l in (0, 1)
    }


@pytest.fixture(scope="session")
def beta_harmonic(harmonic_setups):
    """Coefficient tables for the harmonic problems, M = 25."""
    return {
        l: compute_beta(harmonic_setups[l], np.pi, 25)
        for l in (0, 1, 2)
    }


@pytest.fixture(scope="session")
def setup_half():
    """Non-integer angular parameter, same potential."""
    return ProblemSetup(l=0.5, b=np.pi, q=q_harmonic)


@pytest.fixture(scope="session")
def beta_half_dense(setup_half):
    """M = 100 table for l = 1/2; slow decay needs the long tail."""
    return compute_beta(setup_half, np.pi, 100)
