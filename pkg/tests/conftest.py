import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile the JIT kernels once so per-test timings stay honest
    from pwdensity import bench

    bench.warmup()
