import pytest

from cmldde import ModelParams, _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # trigger JIT compilation once so timed tests measure the numerics only
    _kernels.warmup()


@pytest.fixture(scope="session")
def p3():
    """Reference operating point in the bistable zone (r, delta) = (7.55, 0.0015)."""
    return ModelParams(n=2, beta0=2.5, delta=0.0015, k=1.01, r=7.55)


@pytest.fixture(scope="session")
def hopf_example():
    """(n, beta0, k, delta) of the worked supercritical-threshold example."""
    return 12.0, 1.77, 1.18074, 0.05


def sample_params(rng, n_range=(1.0, 12.0), r_range=(0.1, 20.0), delta_range=(0.002, 0.3)):
    """Random valid parameter set with a positive equilibrium."""
    while True:
        p = ModelParams(
            n=rng.uniform(*n_range),
            beta0=rng.uniform(0.3, 2.5),
            delta=rng.uniform(*delta_range),
            k=rng.uniform(1.02, 1.98),
            r=rng.uniform(*r_range),
        )
        if p.renewal_ratio > 1.0:
            return p
