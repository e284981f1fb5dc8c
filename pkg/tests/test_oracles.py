import math

import numpy as np
import pytest

from decaysurge import oracles, sampler
from decaysurge.oracles import (
    HawkesCluster,
    HawkesEvent,
    HawkesParams,
    ShotNoiseParams,
    hawkes_cluster_simulate,
    hawkes_superposition_value,
    hawkes_with_immigration,
    offspring_counts,
    shotnoise_campbell_lst,
    shotnoise_stationary_lst,
)
from decaysurge.sampler import RngStream


class TestCascade:
    def test_no_jumps_without_excitation(self):
        p = HawkesParams(alpha1=1.0, beta1=0.0)
        cl = hawkes_cluster_simulate(p, 5.0, 100.0, RngStream(0, 0))
        assert cl.events == () and not cl.guard_tripped

    def test_subcritical_clusters_finite(self):
        p = HawkesParams(alpha1=1.0, beta1=0.8)
        rng = RngStream(1, 0)
        for _ in range(200):
            cl = hawkes_cluster_simulate(p, 1.0, math.inf, rng)
            assert not cl.guard_tripped
            assert all(e.time <= f.time for e, f in zip(cl.events, cl.events[1:]))

    def test_offspring_mean_near_branching_ratio(self):
        p = HawkesParams(alpha1=1.0, beta1=0.8)
        rng = RngStream(2, 0)
        counts = []
        while len(counts) < 5000:
            counts.extend(offspring_counts(hawkes_cluster_simulate(p, 1.0, math.inf, rng)))
        m = float(np.mean(counts))
        assert abs(m - 0.8) / 0.8 <= 0.05

    def test_parent_indices_consistent_after_sorting(self):
        p = HawkesParams(alpha1=1.0, beta1=1.1)
        cl = hawkes_cluster_simulate(p, 3.0, 10.0, RngStream(3, 0))
        for i, ev in enumerate(cl.events):
            if ev.parent >= 0:
                assert cl.events[ev.parent].time < ev.time
                assert cl.events[ev.parent].generation == ev.generation - 1

    def test_phase_transition_in_cluster_sizes(self):
        big = {}
        for g1 in (0.8, 1.2):
            p = HawkesParams(alpha1=1.0, beta1=g1)
            rng = RngStream(4, 0)
            n_big = 0
            for _ in range(300):
                cl = hawkes_cluster_simulate(p, 1.0, math.inf, rng, max_events=1000)
                if cl.guard_tripped or len(cl.events) >= 1000:
                    n_big += 1
            big[g1] = n_big / 300
        assert big[0.8] <= 0.01
        assert big[1.2] >= 0.05

    def test_guard_reported(self):
        p = HawkesParams(alpha1=1.0, beta1=1.5)
        tripped = any(
            hawkes_cluster_simulate(p, 5.0, math.inf, RngStream(5, i), max_events=50).guard_tripped
            for i in range(50)
        )
        assert tripped


class TestSuperposition:
    def test_empty_cluster(self):
        p = HawkesParams(alpha1=2.0, beta1=0.5)
        cl = HawkesCluster(events=(), guard_tripped=False)
        assert hawkes_superposition_value(p, 3.0, cl, 1.0) == pytest.approx(3.0 * math.exp(-2.0))

    def test_single_jump_hand_value(self):
        p = HawkesParams(alpha1=1.0, beta1=0.5)
        cl = HawkesCluster(events=(HawkesEvent(time=1.0, mark=2.0, generation=0, parent=-1),), guard_tripped=False)
        t = 3.0
        want = math.exp(-3.0) * 1.0 + math.exp(-2.0) * 2.0
        assert hawkes_superposition_value(p, 1.0, cl, t) == pytest.approx(want)
        # before the jump only the initial mass decays
        assert hawkes_superposition_value(p, 1.0, cl, 0.5) == pytest.approx(math.exp(-0.5))

    def test_matches_generic_sampler_distribution(self, hawkes_sub):
        from scipy.stats import ks_2samp

        p = HawkesParams(alpha1=1.0, beta1=0.8)
        T, n = 5.0, 2500
        branch = [
            hawkes_superposition_value(p, 1.0, hawkes_cluster_simulate(p, 1.0, T, RngStream(6, i)), T)
            for i in range(n)
        ]
        cfg = sampler.SimConfig(horizon=T)
        generic = [
            sampler.simulate_path(hawkes_sub, 1.0, cfg, RngStream(7, i)).value_at(hawkes_sub, T)
            for i in range(n)
        ]
        assert ks_2samp(branch, generic).pvalue > 0.01


class TestImmigration:
    def test_requires_positive_rate(self):
        with pytest.raises(ValueError):
            hawkes_with_immigration(HawkesParams(1.0, 0.5, 0.0), 0.0, 10.0, RngStream(8, 0))

    def test_cluster_rejects_immigration(self):
        with pytest.raises(ValueError):
            hawkes_cluster_simulate(HawkesParams(1.0, 0.5, 0.3), 1.0, 10.0, RngStream(8, 1))

    def test_stationary_mean_with_immigration(self):
        # stationary law is Gamma(mu/alpha1, 1 - gamma1): mean mu/(alpha1 (1 - gamma1))
        p = HawkesParams(alpha1=1.0, beta1=0.5, mu=0.3)
        T, n = 40.0, 1500
        vals = np.array(
            [
                hawkes_superposition_value(p, 0.0, hawkes_with_immigration(p, 0.0, T, RngStream(9, i)), T)
                for i in range(n)
            ]
        )
        want = 0.3 / (1.0 * (1.0 - 0.5))
        se = vals.std(ddof=1) / math.sqrt(n)
        assert abs(vals.mean() - want) <= 4.0 * se


class TestShotNoise:
    def test_normalization_at_zero(self):
        p = ShotNoiseParams(alpha=1.0, beta=0.5, theta=1.0)
        assert shotnoise_stationary_lst(p, 0.0) == 1.0
        assert shotnoise_campbell_lst(p, 0.0) == 1.0

    def test_exponential_marks_closed_form(self):
        p = ShotNoiseParams(alpha=2.0, beta=1.0, theta=3.0)
        for q in (0.5, 1.0, 4.0):
            assert shotnoise_stationary_lst(p, q) == pytest.approx((1 + q / 3.0) ** -0.5, rel=1e-12)

    def test_campbell_quadrature_matches_closed_form(self):
        p = ShotNoiseParams(alpha=1.0, beta=0.5, theta=1.0)
        for q in (0.25, 0.5, 1.0, 2.0, 7.0):
            assert shotnoise_campbell_lst(p, q) == pytest.approx(
                shotnoise_stationary_lst(p, q), rel=1e-10
            )

    def test_generic_mark_transform(self):
        # deterministic unit marks: phi(s) = e^{-s}
        p = ShotNoiseParams(alpha=1.0, beta=0.5, theta=1.0)
        val = shotnoise_stationary_lst(p, 1.0, mark_lst=lambda s: math.exp(-s))
        assert 0.0 < val < 1.0
        exact = math.exp(-0.5 * sum((-1) ** (k + 1) / (k * math.factorial(k)) for k in range(1, 25)))
        assert val == pytest.approx(exact, rel=1e-9)

    def test_rejects_negative_argument(self):
        p = ShotNoiseParams(alpha=1.0, beta=0.5, theta=1.0)
        with pytest.raises(ValueError):
            shotnoise_stationary_lst(p, -1.0)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            ShotNoiseParams(alpha=0.0, beta=1.0, theta=1.0)
