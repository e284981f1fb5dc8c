import math

import numpy as np
import pytest

from decaysurge import ParamFamily, make_family, make_model, parse_expression
from decaysurge import analysis
from decaysurge.analysis import FunctionHandle, PreconditionError


# mpmath-frozen reference values (30 significant digits upstream)
LINEAR_S = {0.25: -1.6850982883635565, 0.5: -0.84874031301735466, 2.0: 1.2558121881449767, 3.0: 2.8227595712432061}
EXPLOSIVE_S1 = {0.5: 7.4776624407393907, 1.0: 2.6393404001997899, 4.0: 0.33607082357168678}
EXPLOSIVE_EXIT = 0.3225148818494834
EXPLOSIVE_HIT_BELOW = 0.35296329850626583
LINEAR_PHI_05_2 = 1.9365829613195289
HAWKES_PHI_05_2 = 3.0642136605896721


class TestFlow:
    def test_identity_at_time_zero(self, linear):
        assert analysis.flow(linear, 1.7, 0.0) == 1.7

    def test_power_family_closed_form(self):
        m = make_model(
            make_family(ParamFamily("power", {"alpha1": 2.0, "a": 0.5})),
            make_family(ParamFamily("constant", {"value": 1.0})),
            make_family(ParamFamily("exponential-survival", {"theta": 1.0})),
        )
        x, t = 4.0, 0.5
        assert analysis.flow(m, x, t) == pytest.approx((math.sqrt(x) - t) ** 2, rel=1e-12)
        assert analysis.time_to_level(m, x, 0.0) == pytest.approx(math.sqrt(x), rel=1e-12)
        assert analysis.flow(m, x, 10.0) == 0.0  # clamped after extinction of the flow

    def test_constant_rate_linear_decay(self, release):
        assert analysis.flow(release, 2.0, 1.5) == pytest.approx(0.5)
        assert analysis.flow(release, 2.0, 5.0) == 0.0

    def test_numeric_flow_matches_closed_form(self, linear):
        twin = make_model(parse_expression("x"), parse_expression("0.5"),
                          make_family(ParamFamily("exponential-survival", {"theta": 1.0})))
        for t in (0.1, 1.0, 3.0):
            assert analysis.flow(twin, 2.0, t) == pytest.approx(2.0 * math.exp(-t), rel=1e-9)


class TestTimeToLevel:
    def test_trivial_and_log_form(self, linear):
        assert analysis.time_to_level(linear, 1.3, 1.3) == 0.0
        assert analysis.time_to_level(linear, 2.0, 1.0) == pytest.approx(math.log(2.0))
        assert analysis.time_to_level(linear, 2.0, 0.0) == math.inf

    def test_rejects_bad_levels(self, linear):
        with pytest.raises(ValueError):
            analysis.time_to_level(linear, 1.0, 2.0)


class TestRateIntegral:
    def test_linear_log_form(self, linear):
        assert analysis.big_gamma(linear, 1.0) == 0.0
        for y in (0.3, 2.0, 7.0):
            assert analysis.big_gamma(linear, y) == pytest.approx(0.5 * math.log(y), rel=1e-12)
        assert analysis.big_gamma_limits(linear) == (-math.inf, math.inf)

    def test_inverse_power_form(self):
        # alpha = x^2, beta = 1: integral of y^-2 from 1 to x is -(1/x - 1)
        m = make_model(parse_expression("x^2"), parse_expression("1"),
                       make_family(ParamFamily("exponential-survival", {"theta": 1.0})))
        for y in (0.5, 2.0, 5.0):
            assert analysis.big_gamma(m, y) == pytest.approx(-(1.0 / y - 1.0), rel=1e-9)
        g0, ginf = analysis.big_gamma_limits(m)
        assert g0 == -math.inf and ginf == pytest.approx(1.0, rel=1e-8)

    def test_release_model_finite_at_zero(self, release):
        g0, ginf = analysis.big_gamma_limits(release)
        assert g0 == pytest.approx(-0.5) and ginf == math.inf


class TestScale:
    def test_anchor(self, linear):
        assert analysis.scale_s(linear, 1.0) == 0.0

    @pytest.mark.parametrize("x,want", sorted(LINEAR_S.items()))
    def test_linear_model_frozen_values(self, linear, x, want):
        assert analysis.scale_s(linear, x) == pytest.approx(want, rel=1e-9)

    def test_strictly_increasing(self, linear):
        grid = np.geomspace(0.2, 8.0, 25)
        vals = [analysis.scale_s(linear, float(g)) for g in grid]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_self_exciting_closed_form_up_to_anchor(self, hawkes_sub):
        g = 0.8
        ref = lambda x: g / (1 - g) * (math.exp((1 - g) * x) - 1.0)
        for x in (0.25, 1.5, 3.0):
            want = math.exp(g) * (ref(x) - ref(1.0))
            assert analysis.scale_s(hawkes_sub, x) == pytest.approx(want, rel=1e-9)

    def test_scale_limit(self, linear, hawkes_sub, hawkes_super):
        assert analysis.scale_s_infinity(linear) == math.inf
        assert analysis.scale_s_infinity(hawkes_sub) == math.inf
        g = 1.2
        want = g * math.exp(g) * math.exp(1.0 - g) / (g - 1.0)  # s1(1) analytic
        assert analysis.scale_s_infinity(hawkes_super) == pytest.approx(want, rel=1e-8)


class TestDecreasingScale:
    @pytest.mark.parametrize("x,want", sorted(EXPLOSIVE_S1.items()))
    def test_frozen_values(self, explosive, x, want):
        assert analysis.scale_s1(explosive, x) == pytest.approx(want, rel=1e-8)

    def test_supercritical_analytic(self, hawkes_super):
        g = 1.2
        for x in (0.5, 1.0, 2.0, 5.0):
            want = g * math.exp(g) * math.exp((1 - g) * x) / (g - 1.0)
            assert analysis.scale_s1(hawkes_super, x) == pytest.approx(want, rel=1e-8)

    def test_sum_identity(self, explosive):
        s_inf = analysis.scale_s_infinity(explosive)
        for x in (0.5, 1.0, 3.0):
            total = analysis.scale_s(explosive, x) + analysis.scale_s1(explosive, x)
            assert total == pytest.approx(s_inf, rel=1e-7)

    def test_strictly_decreasing(self, explosive):
        vals = [analysis.scale_s1(explosive, float(g)) for g in np.geomspace(0.3, 6.0, 15)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_requires_finite_scale_limit(self, linear):
        with pytest.raises(PreconditionError, match="finite scale limit"):
            analysis.scale_s1(linear, 1.0)


class TestSpeedDensity:
    def test_algebraic_identity(self, linear, explosive):
        for m in (linear, explosive):
            for x in (0.4, 1.0, 2.7):
                lhs = analysis.speed_density(m, x) * m.alpha(x) / m.k(x)
                assert lhs == pytest.approx(math.exp(analysis.big_gamma(m, x)), rel=1e-10)

    def test_linear_gamma_shape(self, linear):
        xs = np.linspace(0.3, 4.0, 9)
        ratios = [analysis.speed_density(linear, float(x)) / (x**-0.5 * math.exp(-x)) for x in xs]
        assert max(ratios) / min(ratios) == pytest.approx(1.0, rel=1e-9)

    def test_integrability_flags(self, linear, explosive, hawkes_sub, hawkes_super):
        assert analysis.pi_integrability(linear) == (True, True)
        assert analysis.pi_integrability(explosive) == (True, False)
        assert analysis.pi_integrability(hawkes_sub) == (False, True)
        assert analysis.pi_integrability(hawkes_super) == (False, False)


class TestBoundary:
    def test_natural_for_self_exciting(self, hawkes_sub):
        bd = analysis.classify_boundary(hawkes_sub)
        assert bd.verdict == "natural" and bd.condition_A and not bd.condition_R

    def test_regular_for_release(self, release):
        bd = analysis.classify_boundary(release)
        assert bd.verdict == "regular" and bd.condition_R and bd.accessible

    def test_entrance_for_linear(self, linear):
        bd = analysis.classify_boundary(linear)
        assert bd.verdict == "entrance" and bd.condition_R and not bd.t0_finite

    def test_attracting_when_survival_mass_blows_up(self):
        m = make_model(
            make_family(ParamFamily("constant", {"value": 1.0})),
            make_family(ParamFamily("constant", {"value": 1.0})),
            make_family(ParamFamily("power", {"alpha1": 1.0, "a": -2.0}), role="survival"),
        )
        bd = analysis.classify_boundary(m)
        assert bd.condition_A and not bd.condition_R and bd.verdict == "exit"


class TestRegime:
    def test_linear_positive_recurrent(self, linear):
        rep = analysis.classify_regime(linear)
        assert rep.verdict == "harris_positive_recurrent"
        assert not rep.extinction_possible

    def test_explosive_verdict(self, explosive):
        assert analysis.classify_regime(explosive).verdict == "transient_or_explosive"

    def test_supercritical_with_extinction_flag(self, hawkes_super):
        rep = analysis.classify_regime(hawkes_super)
        assert rep.verdict == "transient_or_explosive" and rep.extinction_possible

    def test_subcritical_extinction(self, hawkes_sub):
        rep = analysis.classify_regime(hawkes_sub)
        assert rep.verdict == "extinction_possible"

    def test_null_recurrent_when_tail_mass_diverges(self):
        # gamma1 = 1 linear model: speed density ~ e^{-y}: fine at inf, 1/y^0 at 0...
        # use k with slower decay: alpha=x, beta=1, k=(1+x)^-1: pi ~ y/(y(1+y)) not integrable at inf
        m = make_model(
            make_family(ParamFamily("power", {"alpha1": 1.0, "a": 1.0})),
            make_family(ParamFamily("constant", {"value": 1.0})),
            make_family(ParamFamily("pareto-survival", {"c": 1.0})),
        )
        rep = analysis.classify_regime(m)
        assert rep.verdict == "harris_null_recurrent"


class TestExitProbability:
    def test_frozen_ratio(self, explosive):
        res = analysis.exit_probability(explosive, 1.0, 0.5, 4.0)
        assert res.value == pytest.approx(EXPLOSIVE_EXIT, rel=1e-7)
        assert res.assumes_exit_time_finite

    def test_boundary_limits(self, explosive):
        assert analysis.exit_probability(explosive, 0.5 + 1e-9, 0.5, 4.0).value == pytest.approx(1.0, abs=1e-7)
        assert analysis.exit_probability(explosive, 4.0 - 1e-9, 0.5, 4.0).value == pytest.approx(0.0, abs=1e-7)

    def test_monotone_in_start_and_bounded(self, explosive):
        xs = np.linspace(0.6, 3.9, 12)
        vals = [analysis.exit_probability(explosive, float(x), 0.5, 4.0).value for x in xs]
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_hit_below(self, explosive):
        assert analysis.hit_below_probability(explosive, 1.0, 0.5) == pytest.approx(
            EXPLOSIVE_HIT_BELOW, rel=1e-8
        )

    def test_preconditions(self, linear):
        with pytest.raises(PreconditionError):
            analysis.exit_probability(linear, 1.0, 0.5, 4.0)
        with pytest.raises(ValueError):
            analysis.exit_probability(linear, 0.4, 0.5, 4.0)


class TestHittingTimes:
    def test_zero_at_start(self, linear):
        assert analysis.mean_hitting_time(linear, 0.7, 0.7) == 0.0

    def test_linear_frozen(self, linear):
        assert analysis.mean_hitting_time(linear, 2.0, 0.5) == pytest.approx(LINEAR_PHI_05_2, rel=1e-8)

    def test_self_exciting_frozen(self, hawkes_sub):
        assert analysis.mean_hitting_time(hawkes_sub, 2.0, 0.5) == pytest.approx(HAWKES_PHI_05_2, rel=1e-8)

    def test_lower_bound_and_monotonicity(self, linear):
        a = 0.5
        for x in (1.0, 2.0, 3.0):
            assert analysis.mean_hitting_time(linear, x, a) >= analysis.time_to_level(linear, x, a)
        x1, x2 = 1.5, 2.5
        gap = analysis.mean_hitting_time(linear, x2, a) - analysis.mean_hitting_time(linear, x1, a)
        assert gap >= analysis.time_to_level(linear, x2, x1) - 1e-9

    def test_requires_integrable_tail(self, explosive):
        with pytest.raises(PreconditionError, match="integrable"):
            analysis.mean_hitting_time(explosive, 2.0, 0.5)


class TestExtinctionTime:
    def test_release_closed_form(self, release):
        assert analysis.mean_extinction_time(release, 2.0) == pytest.approx(4.0, rel=1e-9)
        assert analysis.mean_extinction_time(release, 1.0) == pytest.approx(2.0, rel=1e-9)

    def test_lower_bound(self, release):
        for x in (0.5, 2.0):
            assert analysis.mean_extinction_time(release, x) >= analysis.time_to_level(release, x, 0.0)

    def test_named_preconditions(self, hawkes_sub):
        with pytest.raises(PreconditionError, match="never reaches 0"):
            analysis.mean_extinction_time(hawkes_sub, 1.0)


class TestGenerator:
    def test_constant_annihilated(self, linear):
        assert analysis.generator_apply(linear, lambda y: 3.25, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_scale_annihilated_pointwise(self, linear, hawkes_sub):
        for m in (linear, hawkes_sub):
            s = FunctionHandle(lambda y, m=m: analysis.scale_s(m, y), domain_min=0.0)
            x = 1.3
            bound = 1e-6 * max(1.0, abs(m.alpha(x) * s.derivative(x)))
            assert abs(analysis.generator_apply(m, s, x)) <= bound

    def test_hitting_time_solves_minus_one(self, linear):
        phi = FunctionHandle(lambda y: analysis.mean_hitting_time(linear, y, 0.5), domain_min=0.5)
        assert analysis.generator_apply(linear, phi, 1.4) == pytest.approx(-1.0, abs=1e-6)

    def test_derivative_exact_for_linear_functions(self):
        h = FunctionHandle(lambda y: 3.0 * y - 1.0)
        for x in (0.1, 1.0, 50.0):
            assert abs(h.derivative(x) - 3.0) <= 1e-9 * 3.0


class TestDriftCheck:
    def test_exponential_drift_example(self):
        m = make_model(
            make_family(ParamFamily("linear", {"slope": 1.0, "intercept": 1.0})),
            make_family(ParamFamily("power", {"alpha1": 1.0, "a": 1.0})),
            make_family(ParamFamily("exponential-survival", {"theta": 2.0})),
        )
        V = FunctionHandle(lambda y: math.exp(y), domain_min=0.0)
        rep = analysis.lyapunov_drift_check(m, V, 1.0, 0.0, np.linspace(0.05, 3.0, 7))
        assert rep.satisfied
        for x, d, bound in zip(rep.points, rep.drifts, rep.hitting_time_bounds):
            assert d == pytest.approx(-math.exp(x), rel=1e-6)
            assert bound == pytest.approx(math.exp(x))

    def test_constant_fails_but_reports(self, linear):
        rep = analysis.lyapunov_drift_check(linear, lambda y: 5.0, 0.5, 1.0, [1.0, 2.0])
        assert not rep.satisfied and rep.cd0_nonexplosion

    def test_one_plus_scale_gives_cd0(self, hawkes_sub):
        V = FunctionHandle(lambda y: 1.0 + analysis.scale_s(hawkes_sub, y), domain_min=0.0)
        rep = analysis.lyapunov_drift_check(hawkes_sub, V, 0.5, 1.0, [1.5, 2.5])
        assert not rep.satisfied and rep.cd0_nonexplosion
