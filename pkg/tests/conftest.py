import math

import numpy as np
import pytest

from chtransition import DomainSpec, MobilitySpec, PhysicalParams


@pytest.fixture
def canonical():
    """Symmetric mixture on the reference box; critical temperature 1/4."""
    p = PhysicalParams(R=1.0, gamma=1.0, alpha=1.0, ubar=0.5)
    d = DomainSpec((math.pi, 2.0, 1.0))
    return p, d


@pytest.fixture
def asym():
    """Asymmetric mean fraction (nonzero quadratic coefficient)."""
    return PhysicalParams(R=1.0, gamma=1.0, alpha=1.0, ubar=0.3)


def draw_params(rng: np.random.Generator):
    """One random admissible parameter set with a supercritical regime."""
    while True:
        r = rng.uniform(0.5, 2.0)
        gamma = rng.uniform(0.5, 5.0)
        alpha = rng.uniform(0.2, 3.0)
        ubar = rng.uniform(0.05, 0.95)
        l1 = rng.uniform(2.5, 6.0)
        if 2.0 * gamma > alpha * math.pi**2 / l1**2:
            break
    l2 = rng.uniform(0.5 * l1, l1 * 0.999)
    l3 = rng.uniform(0.3 * l2, l2 * 0.999)
    p = PhysicalParams(
        R=r, gamma=gamma, alpha=alpha, ubar=ubar,
        mobility=MobilitySpec(h0=rng.uniform(0.2, 3.0)),
    )
    return p, DomainSpec((l1, l2, l3))
