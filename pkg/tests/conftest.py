import os

import numpy as np
import pytest
from hypothesis import settings

from dwlattice.dynamics import init_grid, plan_propagator
from dwlattice.lattice import LatticeParams, partition_wells
from dwlattice.spectral import compute_spectrum

settings.register_profile("default", max_examples=50, deadline=None)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("DWLATTICE_HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def grid():
    return init_grid(-9.75, 10.25, 512)


@pytest.fixture(scope="session", params=[0.05, 0.1], ids=["zf0.05", "zf0.1"])
def caption_params(request):
    return LatticeParams(z_f=request.param)


@pytest.fixture(scope="session")
def params01():
    return LatticeParams(z_f=0.1)


@pytest.fixture(scope="session")
def spectrum01(params01):
    return compute_spectrum(params01)


@pytest.fixture(scope="session")
def partition01(params01):
    return partition_wells(params01)


@pytest.fixture(scope="session")
def plan01(params01, grid):
    return plan_propagator(params01, grid, 1e-3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record one acceptance-criterion verdict and fail the test if it is red."""

    def _report(cid: str, ok: bool, detail: str):
        line = f"{cid} {'PASS' if ok else 'FAIL'}: {detail}"
        request.config.stash.setdefault(_ACCEPTANCE, []).append(line)
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
