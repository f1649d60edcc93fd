import os

# size the numba pool before anything imports numba, so thread-count
# reproducibility tests can request up to 8 workers
os.environ.setdefault("NUMBA_NUM_THREADS", "8")

import numpy as np
import pytest

from diskwalk.domain import make_domain


@pytest.fixture(scope="session")
def disk():
    return make_domain("disk")


@pytest.fixture(scope="session")
def cardioid():
    return make_domain("cardioid")


@pytest.fixture(scope="session")
def asym3():
    return make_domain("asym3")


@pytest.fixture(scope="session")
def all_domains(disk, cardioid, asym3):
    return {"disk": disk, "disk2": make_domain("disk2"), "cardioid": cardioid,
            "asym3": asym3}
