import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decaysurge import analysis, chains, sampler
from decaysurge.analysis import PreconditionError
from decaysurge.chains import (
    embedded_survival,
    extract_records,
    record_transition,
    sample_embedded_step,
    simulate_embedded_chain,
    up_move_probability,
    write_record_chain_csv,
)
from decaysurge.sampler import RngStream


# Frozen one-step survival values for alpha=x, beta=1, k=e^{-x} at x=1
# (hand-derivable: S(y|x) = 1 - min(x,y)/x + (e^{min(x,y)} - 1) e^{-y} / x)
FROZEN_S1 = {
    0.25: 0.97119921692859513,
    0.5: 0.89346934028736658,
    1.5: 0.38340049956420359,
    2.0: 0.23254415793482963,
    2.5: 0.14104516152453103,
}
UP_AT_1 = 0.63212055882855768  # 1 - 1/e
PBAR_2_1_2 = 0.070550628548184126
PBAR_2_1_1 = 0.19177649156889286
PBAR_3_1_2 = 0.0326859325506  # mpmath 2-d quadrature, ~11 digits


class TestEmbeddedSurvival:
    @pytest.mark.parametrize("y,want", sorted(FROZEN_S1.items()))
    def test_frozen_values(self, chainsm, y, want):
        assert embedded_survival(chainsm, 1.0, y) == pytest.approx(want, rel=1e-9)

    def test_up_move_probability(self, chainsm):
        assert up_move_probability(chainsm, 1.0) == pytest.approx(UP_AT_1, rel=1e-10)

    def test_survival_limits(self, chainsm):
        assert embedded_survival(chainsm, 1.0, 1e-12) == pytest.approx(1.0, abs=1e-9)
        assert embedded_survival(chainsm, 1.0, 40.0) < 1e-15

    def test_monotone_in_level(self, chainsm):
        ys = np.linspace(0.05, 5.0, 40)
        vals = [embedded_survival(chainsm, 1.0, float(y)) for y in ys]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_preconditions(self, release):
        with pytest.raises(PreconditionError, match="diverge at 0"):
            embedded_survival(release, 1.0, 2.0)  # rate integral finite at 0
        # rate integral diverges at 0 but the flow still reaches 0 in finite
        # time (sublinear decay with a blowing-up jump rate)
        from decaysurge import ParamFamily, make_family, make_model

        m = make_model(
            make_family(ParamFamily("power", {"alpha1": 1.0, "a": 0.5})),
            make_family(ParamFamily("power", {"alpha1": 1.0, "a": -0.6})),
            make_family(ParamFamily("exponential-survival", {"theta": 1.0})),
        )
        with pytest.raises(PreconditionError, match="never reach 0"):
            embedded_survival(m, 1.0, 2.0)

    def test_mc_single_step_agreement(self, chainsm):
        n = 20000
        rng = RngStream(100, 0)
        above = {lv: 0 for lv in FROZEN_S1}
        for _ in range(n):
            ev = sampler.sample_jump_time(chainsm, 1.0, rng)
            y = sampler.sample_jump_target(chainsm, ev.pre_level, rng)
            for lv in above:
                if y > lv:
                    above[lv] += 1
        for lv, want in FROZEN_S1.items():
            emp = above[lv] / n
            se = math.sqrt(want * (1 - want) / n)
            assert abs(emp - want) <= 4.0 * se


class TestEmbeddedSampling:
    def test_direction_support(self, chainsm):
        rng = RngStream(101, 0)
        for _ in range(200):
            st_ = sample_embedded_step(chainsm, 1.0, rng)
            if st_.direction == "up":
                assert st_.z_next >= 1.0
            else:
                assert st_.z_next < 1.0

    def test_up_frequency(self, chainsm):
        rng = RngStream(102, 0)
        n = 4000
        ups = sum(sample_embedded_step(chainsm, 1.0, rng).direction == "up" for _ in range(n))
        se = math.sqrt(UP_AT_1 * (1 - UP_AT_1) / n)
        assert abs(ups / n - UP_AT_1) <= 4.0 * se

    def test_one_step_distribution_dkw(self, chainsm):
        rng = RngStream(103, 0)
        n = 3000
        vals = np.sort([sample_embedded_step(chainsm, 1.0, rng).z_next for _ in range(n)])
        emp = np.arange(1, n + 1) / n
        cdf = np.array([1.0 - embedded_survival(chainsm, 1.0, float(v)) for v in vals])
        band = math.sqrt(math.log(2 / 0.01) / (2 * n))
        assert np.abs(emp - cdf).max() < band

    def test_chain_times_strictly_increase(self, chainsm):
        steps = simulate_embedded_chain(chainsm, 1.0, 40, RngStream(104, 0), with_times=True)
        assert len(steps) == 40
        assert all(s.inter_jump_time > 0 for s in steps)

    def test_empty_chain(self, chainsm):
        assert simulate_embedded_chain(chainsm, 1.0, 0, RngStream(105, 0)) == []

    def test_marginals_match_continuous_time_jump_positions(self, chainsm):
        # two independent constructions of the same law: KS on Z_2
        from scipy.stats import ks_2samp

        n = 2500
        embedded = []
        for i in range(n):
            steps = simulate_embedded_chain(chainsm, 1.0, 2, RngStream(106, i))
            embedded.append(steps[-1].z_next)
        continuous = []
        cfg = sampler.SimConfig(horizon=math.inf if False else 1e9, max_jumps=5)
        for i in range(n):
            rng = RngStream(107, i)
            lvl = 1.0
            for _ in range(2):
                ev = sampler.sample_jump_time(chainsm, lvl, rng)
                lvl = sampler.sample_jump_target(chainsm, ev.pre_level, rng)
            continuous.append(lvl)
        assert ks_2samp(embedded, continuous).pvalue > 0.01


class TestRecords:
    def test_hand_example(self):
        rc = extract_records([3, 1, 4, 1, 5])
        assert rc.record_indices == (0, 2, 4)
        assert rc.record_values == (3.0, 4.0, 5.0)
        assert rc.ages == (2, 2)
        assert rc.record_count_by_N == (1, 1, 2, 2, 3)

    def test_decreasing_input(self):
        rc = extract_records([9, 8, 7])
        assert rc.record_indices == (0,) and rc.record_values == (9.0,) and rc.ages == ()

    def test_ties_are_not_records(self):
        rc = extract_records([2, 2, 2, 3, 3])
        assert rc.record_indices == (0, 3)

    @settings(max_examples=80, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=6), min_size=1, max_size=30))
    def test_matches_brute_force(self, vals):
        rc = extract_records(vals)
        best = vals[0]
        idx = [0]
        for i in range(1, len(vals)):
            if vals[i] > best:
                best = vals[i]
                idx.append(i)
        assert list(rc.record_indices) == idx
        assert all(a >= 1 for a in rc.ages)
        assert list(rc.record_count_by_N) == [sum(1 for r in idx if r <= N) for N in range(len(vals))]

    def test_record_values_strictly_increasing_on_chain_output(self, chainsm):
        steps = simulate_embedded_chain(chainsm, 1.0, 300, RngStream(108, 0))
        rc = extract_records([1.0] + [s.z_next for s in steps])
        assert all(a < b for a, b in zip(rc.record_values, rc.record_values[1:]))

    def test_growing_maxima_for_supercritical(self, hawkes_super):
        # a 10x longer run must push the running record up for nearly every
        # seed; started from mass 30 the no-jump/extinction mass is negligible
        wins = 0
        for i in range(60):
            short = sampler.simulate_path(hawkes_super, 30.0, sampler.SimConfig(horizon=1.5), RngStream(109, i))
            long = sampler.simulate_path(hawkes_super, 30.0, sampler.SimConfig(horizon=15.0), RngStream(109, i))
            m_short = max(short.post_jump, default=0.0)
            m_long = max(long.post_jump, default=0.0)
            wins += m_long > m_short
        assert wins >= 59

    def test_csv_export(self):
        rc = extract_records([3, 1, 4, 1, 5])
        buf = io.StringIO()
        write_record_chain_csv(rc, buf, record_times=[0.0, 1.5, 3.25])
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "n,R_n,Zstar_n,A_n,S_Rn"
        assert lines[1].startswith("0,0,3.0,,")
        assert lines[2].startswith("1,2,4.0,2,")


class TestRecordTransitions:
    def test_depth_one_is_survival(self, chainsm):
        assert record_transition(chainsm, 1, 1.0, 2.0) == embedded_survival(chainsm, 1.0, 2.0)

    def test_frozen_depth_two(self, chainsm):
        assert record_transition(chainsm, 2, 1.0, 2.0) == pytest.approx(PBAR_2_1_2, rel=1e-6)
        assert record_transition(chainsm, 2, 1.0, 1.0) == pytest.approx(PBAR_2_1_1, rel=1e-6)

    def test_frozen_depth_three(self, chainsm):
        assert record_transition(chainsm, 3, 1.0, 2.0) == pytest.approx(PBAR_3_1_2, rel=1e-4)

    def test_vanishes_far_out(self, chainsm):
        assert record_transition(chainsm, 1, 1.0, 35.0) < 1e-12

    def test_monotone_in_level_and_age_mass(self, chainsm):
        p1 = [record_transition(chainsm, 2, 1.0, y) for y in (1.0, 1.5, 2.5)]
        assert all(a >= b for a, b in zip(p1, p1[1:]))
        total = sum(record_transition(chainsm, k, 1.0, 1.0) for k in (1, 2, 3))
        assert total <= 1.0 + 1e-9

    def test_age_law_against_simulation(self, chainsm):
        # P(next record k steps ahead | record at x) for k = 1, 2, 3
        n = 6000
        counts = {1: 0, 2: 0, 3: 0}
        for i in range(n):
            rng = RngStream(110, i)
            lvl = 1.0
            for step in range(1, 8):
                ev = sampler.sample_jump_time(chainsm, lvl, rng)
                lvl = sampler.sample_jump_target(chainsm, ev.pre_level, rng)
                if lvl > 1.0:
                    if step in counts:
                        counts[step] += 1
                    break
        for k in (1, 2, 3):
            want = record_transition(chainsm, k, 1.0, 1.0)
            emp = counts[k] / n
            se = math.sqrt(want * (1 - want) / n)
            assert abs(emp - want) <= 4.0 * se

    def test_depth_capped(self, chainsm):
        with pytest.raises(ValueError):
            record_transition(chainsm, 4, 1.0, 2.0)
        with pytest.raises(ValueError):
            record_transition(chainsm, 2, 2.0, 1.0)
