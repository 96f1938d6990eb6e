import numpy as np
import pytest

from orbitlab.orbit import RunOptions, TauTable, run_orbit
from orbitlab.sieve import sieve_block


@pytest.fixture(scope="session")
def tau_upto_1e5():
    """tau(n) for n in [1, 1e5] as an int array (index n-1)."""
    return sieve_block(1, 10**5 + 1).counts.astype(np.int64)


@pytest.fixture(scope="session")
def tau_table_1e5(tau_upto_1e5):
    arr = tau_upto_1e5.astype(np.uint16)
    return TauTable(xmax=10**5, arr=arr, lst=arr.tolist())


@pytest.fixture(scope="session")
def traced_1e6():
    """Traced run of x = 1e6; shared by segment-hungry tests."""
    return run_orbit(10**6, RunOptions(keep_trace=True))
