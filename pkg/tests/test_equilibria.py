import numpy as np
import pytest
from hypothesis import given, settings

from conftest import params_strategy, params_with
from genspec import equilibria as eqm
from genspec.model import Params, raw_rhs
from genspec.sweep import fold_alpha

# fold of the coexistence pair at alpha_s = 1, from a sympy resultant of the
# full equilibrium equations (independent of the phi coefficients)
LP7_ALPHA = 0.866709201361453


def by_name(p):
    return {e.name: e for e in eqm.all_equilibria(p)}


class TestDerivedConstants:
    def test_eq7_values(self):
        k = eqm.derived_constants(Params.eq7(1.0, 1.0))
        assert k.C == pytest.approx(0.1 / 0.35)
        assert k.D == pytest.approx(-0.5)
        assert k.B == pytest.approx(0.5)
        assert k.A == pytest.approx(0.25 / 0.35 - 0.5)

    def test_small_mutation_limit(self):
        p = params_with(mu=1e-12, alpha=0.7)
        k = eqm.derived_constants(p)
        assert k.C == pytest.approx(0.0, abs=1e-10)
        assert k.A == pytest.approx(0.7 * (p.kappa1 - p.nu))


class TestTableRows:
    def test_trivial(self):
        e = by_name(Params.eq7())["v0"]
        assert np.all(e.state == 0) and e.feasible

    def test_virus_free_second_type(self):
        e = by_name(Params.eq7())["v4"]
        assert list(e.state) == [0, 0.75, 0, 0, 0, 0, 0]

    def test_generalist_free_first_type(self):
        p = Params.eq7(1.0, 1.0)
        s = by_name(p)["v2"].state
        D = -0.5
        assert s[0] == pytest.approx(0.44)
        assert s[5] == pytest.approx(0.56)
        assert s[2] == pytest.approx(-0.22 * (0.22 + D) / (D**2 * 0.25))

    def test_specialist_free(self):
        e = by_name(Params.eq7(1.0, 1.0))["v5"]
        assert e.feasible
        assert e.state[1] == pytest.approx(0.44)
        assert e.state[6] == pytest.approx(0.62)
        assert e.state[4] > 0

    def test_v6_infeasible_when_first_type_grows_faster(self):
        p = params_with(beta1=2.5, beta2=2.0)
        e = by_name(p)["v6"]
        assert e.state[5] == pytest.approx((2.0 - 2.5) / (p.alpha_s * 2.0))
        assert not e.feasible

    def test_zero_x1_implies_zero_specialist(self):
        for e in eqm.all_equilibria(Params.eq7(1.3, 0.6)):
            if e.state[0] == 0:
                assert e.state[5] == 0

    def test_labels(self):
        names = [e.label for e in eqm.all_equilibria(Params.eq7())]
        assert names[:7] == ["trivial", "v-free-1", "gen-free-1", "coex-1", "v-free-2", "spec-free", "gen-free-2"]


class TestCoexistence:
    def test_two_roots_with_small_residual(self):
        p = Params.eq7(1.0, 1.0)
        roots = eqm.coexistence_roots(p)
        assert len(roots.roots) == 2 and roots.roots[0] > roots.roots[1]
        eqs = by_name(p)
        for name in ("v7", "v8"):
            assert eqs[name].residual < 1e-10

    def test_no_real_roots_drops_pair(self):
        p = Params.eq7(0.5, 1.0)
        assert eqm.coexistence_roots(p).roots == ()
        assert set(by_name(p)) == {f"v{i}" for i in range(7)}

    def test_fold_root_repeated(self):
        a = fold_alpha(Params.eq7(1.0, 1.0), 0.5, 1.2)
        assert a == [pytest.approx(LP7_ALPHA, abs=1e-9)]
        r = eqm.coexistence_roots(Params.eq7(a[0], 1.0))
        assert r.fold and r.roots[0] == r.roots[1]

    def test_linear_reduction(self, monkeypatch):
        fake = eqm.DerivedConstants(1, 1, 1, -1, phi2=0.0, phi1=2.0, phi0=-1.0)
        monkeypatch.setattr(eqm, "derived_constants", lambda p: fake)
        assert eqm.coexistence_roots(Params.eq7()).roots == (0.5,)

    def test_degenerate(self, monkeypatch):
        fake = eqm.DerivedConstants(1, 1, 1, -1, phi2=0.0, phi1=0.0, phi0=0.0)
        monkeypatch.setattr(eqm, "derived_constants", lambda p: fake)
        with pytest.raises(ValueError, match="degenerate"):
            eqm.coexistence_roots(Params.eq7())


@settings(max_examples=200, deadline=None)
@given(params_strategy())
def test_residual_property(p):
    for e in eqm.all_equilibria(p):
        if np.all(np.isfinite(e.state)):
            r = np.linalg.norm(raw_rhs(p, e.state))
            assert r < 1e-10 * max(1.0, np.linalg.norm(e.state)), e.name


class TestFeasibilityAndCollisions:
    def test_round_off_tolerated(self):
        s = np.array([1, 0, 0, 0, 0, -1e-13, 0])
        assert eqm.feasibility(s)
        assert not eqm.feasibility(s * 1e3)

    def test_collision_flagged_not_merged(self):
        # on T12 the gen-free-1 point sits on v-free-1
        eqs = by_name(Params.eq7(1.0, 0.44))
        assert "v2" in eqs["v1"].collides_with
        assert len(eqs) == 9

    def test_clamped_report(self):
        e = eqm.Equilibrium("v1", np.array([1, -1e-13, 0, 0, 0, 0, 0]), True, 0.0)
        assert e.reported_state()[1] == 0.0


class TestCoex1Pole:
    def test_singular_line_is_non_finite(self):
        # at reference parameters the zs denominator is 0.22 (alpha_s - alpha)
        e = by_name(Params.eq7(1.0, 1.0))["v3"]
        assert not np.all(np.isfinite(e.state))
        assert not e.feasible and e.residual == np.inf

    def test_off_the_line_is_finite(self):
        e = by_name(Params.eq7(1.0, 1.01))["v3"]
        assert np.all(np.isfinite(e.state))
        assert e.residual < 1e-10 * max(1, e.norm)
