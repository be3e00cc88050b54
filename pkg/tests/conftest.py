"""Shared fixtures and independent dense oracles.

The oracle builders construct operators by explicit Kronecker products,
independently of the bit-twiddling assembly in spinbath.model, so the two
routes can be compared. Bit 0 (the system spin) is the fastest-varying
index, matching the integer-configuration basis ordering.
"""

import numpy as np
import pytest

SZ2 = np.diag([-0.5, 0.5])            # index 0 = down, 1 = up
SP2 = np.array([[0.0, 0.0], [1.0, 0.0]])  # raising: down -> up
SM2 = SP2.T


def site_op(op2, site, n):
    """Embed a single-spin operator at a bit position of an n-spin register."""
    return np.kron(np.eye(2 ** (n - 1 - site)),
                   np.kron(op2, np.eye(2 ** site)))


def dense_sz(site, n):
    return site_op(SZ2, site, n)


def dense_heisenberg_bond(u, v, n, j=1.0):
    """J (Sx Sx + Sy Sy + Sz Sz) = J (SzSz + (S+S- + S-S+)/2)."""
    return j * (dense_sz(u, n) @ dense_sz(v, n)
                + 0.5 * (site_op(SP2, u, n) @ site_op(SM2, v, n)
                         + site_op(SM2, u, n) @ site_op(SP2, v, n)))


def dense_bath(lattice, couplings, n=None):
    from spinbath import model
    n = lattice.N if n is None else n
    h = np.zeros((2 ** n, 2 ** n))
    for u, v, j in model.bath_bonds(lattice, couplings):
        h += dense_heisenberg_bond(u, v, n, j)
    return h


def dense_interaction(lattice):
    n = lattice.N
    h = np.zeros((2 ** n, 2 ** n))
    for r in (1, 2, 3):
        h += dense_heisenberg_bond(0, lattice.bath_site(1, r), n, 1.0)
    return h


@pytest.fixture(scope="session")
def small_lattice():
    from spinbath import model
    return model.LatticeSpec(2)


@pytest.fixture(scope="session")
def uniform_couplings():
    from spinbath import model
    return model.CouplingSpec()


# -- acceptance reporting -------------------------------------------------

def pytest_configure(config):
    config._acceptance = []


@pytest.fixture(scope="session")
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    def record(criterion, passed, detail):
        request.config._acceptance.append((criterion, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = sorted(getattr(config, "_acceptance", []))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in lines:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(
            f"criterion {criterion:2d}: {status} - {detail}")
