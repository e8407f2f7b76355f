import math

import numpy as np
import pytest

from genspec.dynamics import IntegratorConfig, integrate
from genspec.lyapunov import LleConfig, LyapunovError, initial_tangent, lle
from genspec.model import Params, reference_state

REGIMES = {"sink": (0.2, 0.2), "cycle": (0.5, 0.7), "chaos": (0.5, 2.0)}


def run(rates, cfg=LleConfig(), tangent=None):
    p = Params.eq7(*rates)
    return lle(p, reference_state(p), cfg, tangent)


@pytest.fixture(scope="module")
def baseline():
    return {k: run(v) for k, v in REGIMES.items()}


def test_sink_contracts(baseline):
    r = baseline["sink"]
    assert r.lle < -1e-3 and r.converged


def test_limit_cycle_near_zero(baseline):
    assert abs(baseline["cycle"].lle) < 1e-2


def test_chaos_positive(baseline):
    assert baseline["chaos"].lle > 1e-3


def test_history_is_running_mean(baseline):
    r = baseline["sink"]
    assert len(r.history) == 20000
    assert r.history[-1] == r.lle
    assert r.drift < 1e-3


@pytest.mark.parametrize("regime", sorted(REGIMES))
def test_renormalization_interval_invariance(baseline, regime):
    doubled = run(REGIMES[regime], LleConfig(renorm_interval=2.0))
    assert abs(doubled.lle - baseline[regime].lle) < 5e-3


@pytest.mark.parametrize("regime", sorted(REGIMES))
def test_initial_tangent_invariance(regime):
    a = run(REGIMES[regime], tangent=initial_tangent(1))
    b = run(REGIMES[regime], tangent=initial_tangent(2))
    assert abs(a.lle - b.lle) < 2e-3


def test_growth_rate_predicts_divergence_time(baseline):
    p = Params.eq7(0.5, 2.0)
    cfg = IntegratorConfig(t_end=3000)
    a = integrate(p, reference_state(p, 0.5, 0.5), cfg)
    b = integrate(p, reference_state(p, 0.5001, 0.5001), cfg)
    d = np.linalg.norm(a.states - b.states, axis=1)
    observed = a.t[np.argmax(d > 0.1)]
    predicted = math.log(0.1 / d[0]) / baseline["chaos"].lle
    assert observed / 3 < predicted < observed * 3


def test_short_run_reports_non_convergence():
    r = run(REGIMES["chaos"], LleConfig(transient=0.0, accumulation=50.0))
    assert not r.converged
    assert len(r.history) == 50


def test_integration_failure_raises():
    with pytest.raises(LyapunovError):
        run(REGIMES["chaos"], LleConfig(max_steps=5))


def test_tangent_validation():
    with pytest.raises(ValueError):
        run(REGIMES["sink"], tangent=np.zeros(7))


@pytest.mark.parametrize(
    "kw", [dict(accumulation=0), dict(transient=-1), dict(window_fraction=0), dict(accumulation=5, renorm_interval=1)]
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        LleConfig(**kw)


def test_initial_tangent_unit():
    assert np.linalg.norm(initial_tangent()) == pytest.approx(1)
    assert np.linalg.norm(initial_tangent(7)) == pytest.approx(1)
    assert not np.allclose(initial_tangent(1), initial_tangent(2))
