import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from conftest import params_strategy, params_with, random_params
from genspec import model
from genspec.dynamics import IntegratorConfig, integrate
from genspec.model import (
    PARAM_NAMES,
    DimensionalParams,
    ModelAssumptionError,
    Params,
    check_state,
    jacobian,
    nondimensionalize,
    rhs,
    state_norm,
)


def dim(**kw):
    base = dict(
        beta1=2.0, beta2=3.0, delta1=1.0, delta2=1.5, K=1.0, alpha=0.3, alpha_s=0.4, mu=0.1,
        gamma1_s=0.25, gamma1=0.25, gamma2=0.25, kappa_s=2.0, kappa1=2.0, kappa2=2.0,
        nu_s=1.0, nu=1.0, zeta_s=0.22, zeta=0.22,
    )
    base.update(kw)
    return DimensionalParams(**base)


class TestNondimensionalize:
    def test_growth_ratios(self):
        p = nondimensionalize(dim())
        assert p.beta1 == pytest.approx(1.5)
        assert p.beta2 == pytest.approx(1.5)

    def test_equal_burst_sizes_give_unit_kappa(self):
        p = nondimensionalize(dim())
        assert p.kappa1 == p.kappa2 == 1.0

    def test_unit_time_scale_keeps_rates(self):
        p = nondimensionalize(dim(beta1=2.0, delta1=1.0))
        assert p.mu == pytest.approx(0.1)
        assert p.zeta == pytest.approx(0.22)

    def test_infection_rates_scaled_by_capacity(self):
        p = nondimensionalize(dim(K=10.0))
        assert p.alpha == pytest.approx(2.0 * 10.0 / 2.0 * 0.3)
        assert p.alpha_s == pytest.approx(2.0 * 10.0 / 2.0 * 0.4)

    @pytest.mark.parametrize(
        "kw", [dict(beta1=0.5), dict(delta2=0.0), dict(beta2=2.0, delta2=1.0), dict(mu=-1.0)]
    )
    def test_rejects_bad_dimensional_inputs(self, kw):
        with pytest.raises(ModelAssumptionError):
            dim(**kw)

    def test_rejects_output_violating_invariants(self):
        # nu_s / kappa_s >= 1
        with pytest.raises(ModelAssumptionError):
            nondimensionalize(dim(nu_s=3.0))


class TestParams:
    def test_eq7_values(self):
        p = Params.eq7(0.5, 2.0)
        assert p.as_dict() == {
            "beta1": 1.5, "beta2": 2.0, "alpha": 0.5, "alpha_s": 2.0, "mu": 0.1,
            "gamma1_s": 0.25, "gamma1": 0.25, "gamma2": 0.25, "kappa1": 1.0, "kappa2": 1.0,
            "nu_s": 0.5, "nu": 0.5, "zeta_s": 0.22, "zeta": 0.22,
        }

    @pytest.mark.parametrize("kw", [dict(nu_s=1.0), dict(nu=1.0), dict(mu=0.0), dict(zeta=float("nan"))])
    def test_invariants(self, kw):
        with pytest.raises(ModelAssumptionError):
            params_with(**kw)

    def test_negative_a_warns(self):
        with pytest.warns(UserWarning, match="A <= 0"):
            params_with(mu=5.0)

    def test_with_rates_is_a_copy(self):
        p = Params.eq7()
        q = p.with_rates(alpha=2.0)
        assert (p.alpha, q.alpha, q.alpha_s) == (1.0, 2.0, 1.0)

    def test_array_order(self):
        p = Params.eq7(0.3, 0.7)
        assert list(p.as_array()) == [getattr(p, n) for n in PARAM_NAMES]


class TestRhs:
    def test_zero_state(self):
        assert np.all(rhs(Params.eq7(), np.zeros(7)) == 0)

    def test_virus_free_point_is_rest(self):
        assert np.all(rhs(Params.eq7(), [1, 0, 0, 0, 0, 0, 0]) == 0)

    def test_hand_evaluated_point(self):
        f = rhs(Params.eq7(0.5, 2.0), [1, 0.75, 0, 0, 0, 0.5, 0.5])
        assert f[0] == pytest.approx(-2.0)
        assert f[1] == pytest.approx(-1.6875)
        # ys1: a_s zs x1; y1: a z x1; y2: a z x2
        assert f[2:5] == pytest.approx([1.0, 0.25, 0.1875])
        # zs: -nu_s a_s zs x1 - zeta_s zs; z: -nu a z (x1+x2) - zeta z
        assert f[5] == pytest.approx(-0.5 - 0.11)
        assert f[6] == pytest.approx(-0.21875 - 0.11)

    def test_rejects_negative_state(self):
        with pytest.raises(ValueError):
            rhs(Params.eq7(), [1, 0, 0, 0, 0, -1e-6, 0])

    def test_clamps_round_off_negatives(self):
        s = check_state([1, 0, 0, 0, 0, -1e-12, 0])
        assert s[5] == 0.0

    def test_wrong_shape(self):
        with pytest.raises(ValueError):
            rhs(Params.eq7(), np.zeros(6))


def central_difference(p, s, h=1e-6):
    J = np.empty((7, 7))
    for j in range(7):
        e = np.zeros(7)
        e[j] = h
        J[:, j] = (model.raw_rhs(p, s + e) - model.raw_rhs(p, s - e)) / (2 * h)
    return J


class TestJacobian:
    def test_trivial_point_structure(self):
        p = Params.eq7()
        J = jacobian(p, np.zeros(7))
        assert np.diag(J) == pytest.approx([1, 1.5, -0.25, -0.35, -0.25, -0.22, -0.22])
        off = J - np.diag(np.diag(J))
        nz = {(i, j) for i, j in zip(*np.nonzero(off))}
        assert nz == {(5, 2), (6, 3), (6, 4), (2, 3)}

    def test_y2_column_has_two_entries(self):
        rng = np.random.default_rng(3)
        J = jacobian(Params.eq7(), rng.uniform(0, 1, 7))
        assert np.count_nonzero(J[:, 4]) == 2
        assert J[4, 4] == -0.25 and J[6, 4] == 0.25

    @settings(max_examples=100, deadline=None)
    @given(params_strategy(), hst.integers(0, 2**32 - 1))
    def test_matches_finite_differences(self, p, seed):
        s = np.random.default_rng(seed).uniform(0.1, 1.5, 7)
        J = jacobian(p, s)
        fd = central_difference(p, s)
        err = np.max(np.abs(J - fd)) / max(1.0, np.max(np.abs(J)))
        assert err < 1e-6


class TestOrthant:
    @settings(max_examples=200, deadline=None)
    @given(params_strategy(), hst.integers(0, 6), hst.integers(0, 2**32 - 1))
    def test_face_derivative_nonnegative(self, p, i, seed):
        s = np.random.default_rng(seed).uniform(0, 2, 7)
        s[i] = 0.0
        assert rhs(p, s)[i] >= 0.0

    def test_long_run_stays_nonnegative(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            p = random_params(rng)
            s0 = rng.uniform(0, 1, 7)
            traj = integrate(p, s0, IntegratorConfig(t_end=1000))
            assert traj.states.min() >= -1e-9

    def test_virus_free_subsystem(self):
        traj = integrate(Params.eq7(), [0.3, 0.2, 0, 0, 0, 0, 0], IntegratorConfig(t_end=50))
        assert np.all(traj.states[:, 2:] == 0)
        # competitive Lotka-Volterra part
        x1, x2 = traj.states[-1, :2]
        assert (x1, x2) == pytest.approx((1.0, 0.0), abs=1e-6)


class TestParamFiles:
    def test_round_trip(self, tmp_path):
        p = Params.eq7(0.37, 1.9)
        path = tmp_path / "p.txt"
        path.write_text(model.dump_params(p))
        assert model.load_params(path) == p

    def test_comments_and_blank_lines(self):
        text = "# header\n\n" + model.dump_params(Params.eq7()).replace("mu=", "mu = ") + "alpha=2 # inline\n"
        assert model.parse_params_text(text).alpha == 2.0

    def test_missing_keys(self):
        with pytest.raises(KeyError, match="missing"):
            model.parse_params_text("alpha=1\n")

    def test_base_fills_missing(self):
        p = model.parse_params_text("alpha=0.4\n", base=Params.eq7().as_dict())
        assert p == Params.eq7(0.4, 1.0)

    def test_unknown_key_lists_valid(self):
        with pytest.raises(KeyError, match="valid keys: beta1"):
            model.parse_assignment("gamma=1")

    def test_bad_value(self):
        with pytest.raises(ValueError):
            model.parse_assignment("alpha=fast")


@pytest.mark.parametrize("s, n", [(np.zeros(7), 0.0), ([1, 0, 0, 0, 0, 0, 0], 1.0), ([3, 4, 0, 0, 0, 0, 0], 5.0)])
def test_state_norm(s, n):
    assert state_norm(s) == n


def test_reference_state_uses_capacity():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        s = model.reference_state(Params.eq7(), 0.2, 0.4)
    assert list(s) == [1.0, 0.75, 0, 0, 0, 0.2, 0.4]
