import math

import numpy as np
import pytest

from decaysurge import analysis, duality, sampler
from decaysurge.duality import dual_gamma, dual_triple, gc_first_jump_time, pathwise_duality_check
from decaysurge.sampler import RngStream, SimConfig


class TestDualTriple:
    def test_linear_composition(self, linear):
        gc = dual_triple(linear)
        for x in (0.2, 1.0, 5.0):
            assert gc.alpha_tilde(x) == pytest.approx(1.0 * x)  # x^2 * (1/x) = x
            assert gc.beta_tilde(x) == 0.5
            assert gc.h_tilde(x) == pytest.approx(math.exp(-1.0 / x))

    def test_h_is_nondecreasing_positive(self, explosive):
        gc = dual_triple(explosive)
        xs = np.geomspace(0.05, 50.0, 30)
        vals = [gc.h_tilde(float(x)) for x in xs]
        assert all(v > 0 for v in vals)
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_rate_integral_identity(self, linear, explosive):
        for m in (linear, explosive):
            for x in np.geomspace(0.02, 50.0, 21):
                lhs = dual_gamma(m, float(x))
                rhs = -analysis.big_gamma(m, 1.0 / float(x))
                assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(rhs))

    def test_involution(self, linear):
        gc = dual_triple(linear)
        for x in (0.3, 1.0, 4.0):
            assert x * x * gc.alpha_tilde(1.0 / x) == pytest.approx(linear.alpha(x), rel=1e-12)
            assert gc.beta_tilde(1.0 / x) == pytest.approx(linear.beta(x), rel=1e-12)
            assert gc.h_tilde(1.0 / x) == pytest.approx(linear.k(x), rel=1e-12)


class TestPureFlowDuality:
    def test_reciprocal_of_decay_is_growth(self, linear):
        gc = dual_triple(linear)
        grow = duality._growth_flow(linear, gc)
        for t in (0.0, 0.5, 2.0, 10.0):
            lhs = 1.0 / analysis.flow(linear, 1.0, t)
            assert abs(lhs - grow(1.0, t)) <= 1e-9 * max(1.0, lhs)

    def test_numeric_growth_flow_agrees_with_closed_form(self, linear):
        gc = dual_triple(linear)
        closed = duality._growth_flow(linear, gc)
        numeric = duality._NumericGrowthFlow(gc)
        for t in (0.3, 1.7):
            assert numeric(0.5, t) == pytest.approx(closed(0.5, t), rel=1e-9)


class TestPathwiseCheck:
    def test_tiny_discrepancy_and_shared_times(self, linear):
        cfg = SimConfig(horizon=25.0)
        for seed in range(10):
            res = pathwise_duality_check(linear, 2.0, cfg, seed)
            assert res.max_discrepancy < 1e-9
            assert not res.truncated
            direct = sampler.simulate_path(linear, 2.0, cfg, RngStream(seed, 0))
            assert res.jump_times == tuple(direct.jump_times)

    def test_truncates_when_the_interior_is_left(self, release):
        # finite rate integral at 0: some legs end with the flow reaching 0
        cfg = SimConfig(horizon=200.0)
        truncated = any(pathwise_duality_check(release, 1.0, cfg, s).truncated for s in range(20))
        assert truncated


class TestFirstJumpLaw:
    def test_two_sample_ks(self, linear):
        from scipy.stats import ks_2samp

        n = 3000
        r1, r2 = RngStream(500, 0), RngStream(501, 0)
        ds = [sampler.sample_jump_time(linear, 2.0, r1).time for _ in range(n)]
        gc = [gc_first_jump_time(linear, 0.5, r2) for _ in range(n)]
        assert all(math.isfinite(t) for t in gc)
        assert ks_2samp(ds, gc).pvalue > 0.01

    def test_infinite_when_dual_rate_budget_runs_out(self, release):
        rng = RngStream(502, 0)
        draws = [gc_first_jump_time(release, 0.5, rng) for _ in range(2000)]
        frac_inf = sum(math.isinf(t) for t in draws) / len(draws)
        want = math.exp(-1.0)  # same no-jump mass as the primal from x = 2
        assert abs(frac_inf - want) <= 4.0 * math.sqrt(want * (1 - want) / len(draws))
