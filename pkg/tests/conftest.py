import numpy as np
import pytest


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger jit compilation once so timed assertions see warm kernels."""
    from gevboot._backend import kernels

    eta = np.array([-0.5, 0.0, 0.5])
    y = np.array([0, 1, 1], dtype=np.int64)
    for tau in (0.0, 0.5, -0.5, 2.0, -2.0):
        kernels.response_prob(eta, tau)
        kernels.log_survival(eta, tau)
        kernels.dprob_deta(eta, tau)
        kernels.bernoulli_loglik(eta, y, tau)
        kernels.score_weights(eta, y, tau)
