import math

import numpy as np
import pytest
from conftest import ScriptedRng

from beamkm.channel import ChannelInstance, child_rng, make_dft_codebook
from beamkm.prob_est import (EmpiricalProbTable, FeConfig, KsDetector,
                             build_training_table, fe_estimate_pair, h0_cdf,
                             ks_estimate_pair, ks_statistic, ks_threshold)


def null_channel(n=1, noise_var=1.0):
    return ChannelInstance(h=np.zeros((n, n), dtype=complex), path_gain=0.0,
                           aod=0.0, aoa=0.0, noise_var=noise_var)


UNIT_BEAM = np.array([1.0 + 0j])


class TestH0Cdf:
    def test_origin(self):
        assert h0_cdf(0.0, 1.0) == 0.0

    def test_median(self):
        assert h0_cdf(2.0 * math.log(2.0), 2.0) == pytest.approx(0.5, abs=1e-12)

    def test_three_sigma(self):
        assert h0_cdf(3.0, 1.0) == pytest.approx(1.0 - math.exp(-3.0), abs=1e-12)
        assert h0_cdf(3.0, 1.0) == pytest.approx(0.950213, abs=1e-6)

    def test_monotone_and_range(self):
        xs = np.linspace(0.0, 20.0, 1000)
        vals = h0_cdf(xs, 0.7)
        assert np.all(np.diff(vals) >= 0.0)
        assert vals[0] == 0.0 and vals[-1] < 1.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            h0_cdf(-0.1, 1.0)


class TestKsStatistic:
    def test_single_sample(self):
        # sample placed where the null CDF equals 0.3 -> sup distance 0.7
        x0 = -math.log(0.7)
        assert ks_statistic([x0], 1.0) == pytest.approx(0.7, abs=1e-12)

    def test_all_zero_samples(self):
        assert ks_statistic([0.0, 0.0, 0.0, 0.0], 1.0) == 1.0

    def test_null_median_scales_like_kolmogorov(self):
        l_samples = 1000
        rng = child_rng(31)
        zs = [ks_statistic(rng.exponential(1.0, l_samples), 1.0)
              for _ in range(200)]
        assert np.median(zs) < 1.36 / math.sqrt(l_samples) * 1.5

    def test_distribution_free(self):
        # Z depends on the samples only through their null-CDF values
        rng = child_rng(32)
        samples = rng.exponential(2.0, 25)
        z1 = ks_statistic(samples, 2.0)
        mapped = -5.0 * np.log1p(-h0_cdf(samples, 2.0))  # same CDF values at scale 5
        z2 = ks_statistic(mapped, 5.0)
        assert z1 == pytest.approx(z2, abs=1e-12)

    def test_range_and_empty(self):
        rng = child_rng(33)
        for _ in range(50):
            z = ks_statistic(rng.exponential(1.0, 7), 1.0)
            assert 0.0 <= z <= 1.0
        with pytest.raises(ValueError):
            ks_statistic([], 1.0)


class TestKsThreshold:
    def test_reference_value(self):
        # high-precision oracle for the closed form at L=5, alpha=0.05
        import mpmath
        mpmath.mp.dps = 50
        oracle = float(mpmath.sqrt(-mpmath.log(mpmath.mpf("0.025")) / 10))
        assert ks_threshold(0.05, 5) == pytest.approx(oracle, abs=1e-12)
        assert ks_threshold(0.05, 5) == pytest.approx(0.607365, abs=1e-5)

    def test_unit_threshold(self):
        assert ks_threshold(2.0 * math.exp(-2.0), 1) == pytest.approx(1.0, abs=1e-12)

    def test_larger_sample(self):
        assert ks_threshold(0.05, 50) == pytest.approx(0.192065, abs=1e-6)

    def test_monotonicity(self):
        assert ks_threshold(0.01, 10) > ks_threshold(0.05, 10)
        assert ks_threshold(0.05, 10) > ks_threshold(0.05, 40)

    def test_domain(self):
        for bad in (0.0, -1.0, 2.0, 2.5):
            with pytest.raises(ValueError):
                ks_threshold(bad, 5)
        with pytest.raises(ValueError):
            ks_threshold(0.05, 0)


class TestKsEstimatePair:
    def test_null_false_alarm_level(self):
        det = KsDetector(l_samples=50, alpha=0.05, t_ks=8, noise_var=1.0)
        ch = null_channel()
        rng = child_rng(34)
        mean_p = np.mean([ks_estimate_pair(ch, UNIT_BEAM, UNIT_BEAM, det, rng)
                          for _ in range(500)])
        assert mean_p <= 0.10

    def test_strong_signal_always_fires(self):
        det = KsDetector(l_samples=5, alpha=0.05, t_ks=8, noise_var=1.0)
        ch = ChannelInstance(h=np.array([[100.0 + 0j]]), path_gain=1.0,
                             aod=0.0, aoa=0.0, noise_var=1.0)
        p = ks_estimate_pair(ch, UNIT_BEAM, UNIT_BEAM, det, ScriptedRng())
        assert p == 1.0

    def test_boundary_comparison_is_closed(self):
        # deterministic soundings -> every slot attains Z == epsilon exactly
        ch = null_channel()
        rng = ScriptedRng(normals=[1.0, 1.0] * 40)
        z = ks_statistic([1.0] * 5, 1.0)  # each scripted sounding has power 1
        det = KsDetector(l_samples=5, alpha=0.05, t_ks=8, noise_var=1.0)
        object.__setattr__(det, "epsilon", z)
        assert ks_estimate_pair(ch, UNIT_BEAM, UNIT_BEAM, det, rng) == 1.0

    def test_lattice_values(self):
        det = KsDetector(l_samples=5, alpha=0.5, t_ks=7, noise_var=1.0)
        rng = child_rng(35)
        for _ in range(20):
            p = ks_estimate_pair(null_channel(), UNIT_BEAM, UNIT_BEAM, det, rng)
            assert p in {k / 7 for k in range(8)}

    def test_detector_invariants(self):
        det = KsDetector(l_samples=5, alpha=0.05, t_ks=8, noise_var=1.0)
        assert det.epsilon == pytest.approx(
            math.sqrt(-math.log(0.025) / 10.0), abs=1e-12)
        with pytest.raises(ValueError):
            KsDetector(l_samples=0, alpha=0.05, t_ks=8, noise_var=1.0)
        with pytest.raises(ValueError):
            KsDetector(l_samples=5, alpha=0.05, t_ks=8, noise_var=0.0)


class TestFeEstimatePair:
    def test_direct_count(self):
        # zero channel; noise script gives powers 2*tau, tau/2, 3*tau with tau=2
        ch = null_channel()
        cfg = FeConfig(tau_db=10.0 * math.log10(2.0), t_fe=3)
        powers = [4.0, 1.0, 6.0]
        script = []
        for p in powers:
            script += [math.sqrt(2.0 * p), 0.0]  # standard normals scaled by sqrt(1/2)
        p_hat = fe_estimate_pair(ch, UNIT_BEAM, UNIT_BEAM, cfg, ScriptedRng(script))
        assert p_hat == pytest.approx(2.0 / 3.0)

    def test_zero_threshold_all_fire(self):
        cfg = FeConfig(tau_db=-math.inf, t_fe=8)
        p = fe_estimate_pair(null_channel(), UNIT_BEAM, UNIT_BEAM, cfg, child_rng(36))
        assert p == 1.0

    def test_high_threshold_null_tail(self):
        cfg = FeConfig(tau_db=12.0, t_fe=8)
        ch = null_channel()
        rng = child_rng(37)
        mean_p = np.mean([fe_estimate_pair(ch, UNIT_BEAM, UNIT_BEAM, cfg, rng)
                          for _ in range(10_000)])
        # exponential tail: P(power >= 10^1.2) = exp(-15.85) ~ 1.3e-7
        assert mean_p < 1e-4

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            FeConfig(tau_db=0.0, t_fe=0)


class TestTrainingTable:
    def test_cardinality(self):
        ch = null_channel(2)
        f_cb = make_dft_codebook(2, 2, "transmit")
        w_cb = make_dft_codebook(2, 2, "receive")
        det = KsDetector(l_samples=3, alpha=0.05, t_ks=2, noise_var=1.0)
        table = build_training_table(ch, f_cb, w_cb, [0, 1], [0, 1], det, child_rng(38))
        assert len(table.probs) == 4
        assert set(table.probs) == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_zero_threshold_gives_ones(self):
        ch = null_channel(2)
        f_cb = make_dft_codebook(2, 2, "transmit")
        w_cb = make_dft_codebook(2, 2, "receive")
        cfg = FeConfig(tau_db=-math.inf, t_fe=4)
        table = build_training_table(ch, f_cb, w_cb, [0, 1], [0, 1], cfg, child_rng(39))
        assert all(p == 1.0 for p in table.probs.values())

    def test_sounding_budget(self):
        ch = null_channel(4)
        f_cb = make_dft_codebook(4, 4, "transmit")
        w_cb = make_dft_codebook(4, 4, "receive")
        det = KsDetector(l_samples=5, alpha=0.05, t_ks=8, noise_var=1.0)
        table = build_training_table(ch, f_cb, w_cb, range(4), range(4), det,
                                     child_rng(40))
        assert table.soundings_used == 16 * 8 * 5 == 640
        cfg = FeConfig(tau_db=3.0, t_fe=8)
        table_fe = build_training_table(ch, f_cb, w_cb, range(4), range(4), cfg,
                                        child_rng(40))
        assert table_fe.soundings_used == 16 * 8

    def test_index_validation(self):
        ch = null_channel(2)
        f_cb = make_dft_codebook(2, 2, "transmit")
        w_cb = make_dft_codebook(2, 2, "receive")
        det = KsDetector(l_samples=2, alpha=0.05, t_ks=2, noise_var=1.0)
        with pytest.raises(ValueError):
            build_training_table(ch, f_cb, w_cb, [0, 2], [0], det, child_rng(41))
        with pytest.raises(ValueError):
            build_training_table(ch, f_cb, w_cb, [0], [0, 0], det, child_rng(41))

    def test_csv_roundtrip(self, tmp_path):
        table = EmpiricalProbTable(train_tx=(0, 2), train_rx=(1, 3),
                                   probs={(0, 1): 0.25, (0, 3): 1.0,
                                          (2, 1): 0.0, (2, 3): 0.5},
                                   soundings_used=32)
        path = tmp_path / "table.csv"
        table.to_csv(path)
        assert path.read_text().splitlines()[0] == "t,r,p,soundings"
        back = EmpiricalProbTable.from_csv(path)
        assert back.probs == table.probs
        assert back.soundings_used == table.soundings_used

    def test_probability_range_enforced(self):
        with pytest.raises(ValueError):
            EmpiricalProbTable(train_tx=(0,), train_rx=(0,),
                               probs={(0, 0): 1.5}, soundings_used=1)
