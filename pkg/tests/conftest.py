import warnings

import numpy as np
import pytest
from hypothesis import strategies as hst

from genspec.model import PARAM_NAMES, Params


@pytest.fixture
def eq7():
    return Params.eq7


def random_params(rng: np.random.Generator) -> Params:
    """A draw satisfying the parameter invariants (A may be negative)."""
    k1, k2 = rng.uniform(0.6, 5.0, 2)
    values = dict(
        beta1=rng.uniform(0.2, 3.0),
        beta2=rng.uniform(0.2, 3.0),
        alpha=rng.uniform(0.05, 5.0),
        alpha_s=rng.uniform(0.05, 5.0),
        mu=rng.uniform(0.01, 0.5),
        gamma1_s=rng.uniform(0.05, 1.0),
        gamma1=rng.uniform(0.05, 1.0),
        gamma2=rng.uniform(0.05, 1.0),
        kappa1=k1,
        kappa2=k2,
        nu_s=rng.uniform(0.05, 0.95),
        nu=rng.uniform(0.05, 0.95) * min(k1, k2),
        zeta_s=rng.uniform(0.05, 1.0),
        zeta=rng.uniform(0.05, 1.0),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Params(**values)


@hst.composite
def params_strategy(draw):
    seed = draw(hst.integers(0, 2**32 - 1))
    return random_params(np.random.default_rng(seed))


@hst.composite
def state_strategy(draw, scale=2.0):
    return np.array([draw(hst.floats(0.0, scale)) for _ in range(7)])


def params_with(**kw) -> Params:
    base = Params.eq7().as_dict()
    base.update(kw)
    return Params(**{k: base[k] for k in PARAM_NAMES})
