import numpy as np
import pytest
from conftest import ScriptedRng

from beamkm.channel import (ChannelInstance, SoundingOutcome, beamforming_gain,
                            child_rng, exhaustive_search, genie_best_pair,
                            make_dft_codebook, sample_channel, sound_beam_pair,
                            sound_powers, to_db, ula_response)


def make_channel(h, noise_var=1.0):
    return ChannelInstance(h=np.asarray(h, dtype=complex), path_gain=1.0,
                           aod=0.0, aoa=0.0, noise_var=noise_var)


class TestDftCodebook:
    def test_two_point_dft(self):
        cb = make_dft_codebook(2, 2)
        s = 1 / np.sqrt(2)
        np.testing.assert_allclose(cb.beams[0], [s, s], atol=1e-15)
        np.testing.assert_allclose(cb.beams[1], [s, -s], atol=1e-15)

    def test_identity_case(self):
        cb = make_dft_codebook(1, 1)
        np.testing.assert_allclose(cb.beams, [[1.0]], atol=1e-15)

    def test_gram_is_identity(self):
        cb = make_dft_codebook(16, 16)
        gram = cb.beams.conj() @ cb.beams.T
        np.testing.assert_allclose(gram, np.eye(16), atol=1e-10)

    def test_unit_norms(self):
        for n, size in [(4, 4), (8, 16), (16, 8)]:
            cb = make_dft_codebook(n, size)
            norms = np.linalg.norm(cb.beams, axis=1)
            assert np.max(np.abs(norms - 1.0)) <= 1e-12

    def test_invalid_sizes(self):
        with pytest.raises(ValueError):
            make_dft_codebook(0, 4)
        with pytest.raises(ValueError):
            make_dft_codebook(4, 0)


class TestSampleChannel:
    def test_rank_one(self):
        rng = child_rng(1)
        for _ in range(20):
            ch = sample_channel(4, 6, 0.5, rng)
            s = np.linalg.svd(ch.h, compute_uv=False)
            assert s[1] < 1e-9 * s[0]

    def test_zero_gain_gives_zero_matrix(self):
        ch = sample_channel(3, 3, 1.0, ScriptedRng(uniforms=[0.7, 1.2]))
        assert np.all(ch.h == 0.0)
        assert ch.path_gain == 0.0

    def test_mean_frobenius_energy(self):
        rng = child_rng(2)
        total = 0.0
        n = 10_000
        for _ in range(n):
            ch = sample_channel(4, 4, 1.0, rng)
            total += np.linalg.norm(ch.h) ** 2
        assert abs(total / n - 16.0) / 16.0 < 0.05

    def test_snr_definition(self):
        ch = sample_channel(2, 2, 0.25, child_rng(3))
        assert ch.snr == 4.0

    def test_determinism(self):
        a = sample_channel(4, 4, 0.1, child_rng(9, 5))
        b = sample_channel(4, 4, 0.1, child_rng(9, 5))
        assert np.array_equal(a.h, b.h)
        assert a.aod == b.aod and a.aoa == b.aoa


class TestSounding:
    def test_noiseless_matches_signal(self):
        ch = make_channel(np.outer([1, 1j], [1, -1]) / 2, noise_var=1.0)
        f = np.array([1.0, 0.0])
        w = np.array([0.0, 1.0])
        out = sound_beam_pair(ch, f, w, ScriptedRng())
        expected = complex(w.conj() @ ch.h @ f)
        assert out.y == expected
        assert out.power == abs(expected) ** 2

    def test_null_channel_power_is_exponential(self):
        ch = make_channel(np.zeros((2, 2)), noise_var=1.0)
        f = np.array([1.0, 0.0])
        w = np.array([1.0, 0.0])
        powers = sound_powers(ch, f, w, 10_000, child_rng(4))
        assert abs(powers.mean() - 1.0) < 0.05
        # test-only distribution check against an independent implementation
        from scipy import stats
        dist = stats.kstest(powers, "expon", args=(0.0, 1.0)).statistic
        assert dist < 0.02

    def test_orthogonal_combiner_zero_power(self):
        ch = make_channel([[1.0, 0.0], [0.0, 0.0]], noise_var=1.0)
        f = np.array([1.0, 0.0])
        w = np.array([0.0, 1.0])  # orthogonal to H f = e_1
        out = sound_beam_pair(ch, f, w, ScriptedRng())
        assert out.power == 0.0

    def test_dimension_mismatch(self):
        ch = make_channel(np.zeros((2, 3)), noise_var=1.0)
        with pytest.raises(ValueError):
            sound_beam_pair(ch, np.ones(2), np.ones(2) / np.sqrt(2), ScriptedRng())

    def test_vectorized_matches_scalar(self):
        ch = make_channel(np.outer([1.0, 0.5j], [0.6, 0.8]), noise_var=0.5)
        f = np.array([0.6, 0.8])
        w = np.array([1.0, 0.0])
        batch = sound_powers(ch, f, w, 5, child_rng(11))
        rng = child_rng(11)
        singles = [sound_beam_pair(ch, f, w, rng).power for _ in range(5)]
        np.testing.assert_array_equal(batch, singles)

    def test_outcome_power_validation(self):
        with pytest.raises(ValueError):
            SoundingOutcome(y=1 + 1j, power=5.0)


class TestBaselines:
    def test_genie_singleton(self):
        f_cb = make_dft_codebook(1, 1, "transmit")
        w_cb = make_dft_codebook(1, 1, "receive")
        ch = make_channel([[0.3]], noise_var=1.0)
        pair, gain = genie_best_pair(ch, f_cb, w_cb)
        assert pair == (0, 0)
        assert gain == pytest.approx(0.09)

    def test_genie_matching_pair(self):
        f_cb = make_dft_codebook(4, 4, "transmit")
        w_cb = make_dft_codebook(4, 4, "receive")
        h = np.outer(w_cb.beams[3], f_cb.beams[2].conj())
        ch = make_channel(h, noise_var=1.0)
        pair, _ = genie_best_pair(ch, f_cb, w_cb)
        assert pair == (2, 3)

    def test_genie_equals_enumeration(self):
        f_cb = make_dft_codebook(4, 4, "transmit")
        w_cb = make_dft_codebook(4, 4, "receive")
        ch = sample_channel(4, 4, 0.5, child_rng(21))
        pair, gain = genie_best_pair(ch, f_cb, w_cb)
        best = max(((t, r) for t in range(4) for r in range(4)),
                   key=lambda tr: (beamforming_gain(ch, f_cb.beams[tr[0]],
                                                    w_cb.beams[tr[1]]), -tr[0], -tr[1]))
        assert pair == best
        for t in range(4):
            for r in range(4):
                assert gain >= beamforming_gain(ch, f_cb.beams[t], w_cb.beams[r])

    def test_exhaustive_noiseless_equals_genie(self):
        f_cb = make_dft_codebook(4, 4, "transmit")
        w_cb = make_dft_codebook(4, 4, "receive")
        ch = sample_channel(4, 4, 0.5, child_rng(22))
        pair, _ = genie_best_pair(ch, f_cb, w_cb)
        assert exhaustive_search(ch, f_cb, w_cb, ScriptedRng()) == pair

    def test_exhaustive_tie_breaks_to_origin(self):
        f_cb = make_dft_codebook(2, 2, "transmit")
        w_cb = make_dft_codebook(2, 2, "receive")
        ch = make_channel(np.zeros((2, 2)), noise_var=1.0)
        # equal noise on every sounding -> equal powers -> smallest pair
        rng = ScriptedRng(normals=[1.0, 1.0] * 4)
        assert exhaustive_search(ch, f_cb, w_cb, rng) == (0, 0)

    def test_exhaustive_vanishing_noise_recovers_genie(self):
        f_cb = make_dft_codebook(8, 8, "transmit")
        w_cb = make_dft_codebook(8, 8, "receive")
        hits = 0
        for trial in range(100):
            ch = sample_channel(8, 8, 1e-6, child_rng(23, trial))
            pair, _ = genie_best_pair(ch, f_cb, w_cb)
            if exhaustive_search(ch, f_cb, w_cb, child_rng(24, trial)) == pair:
                hits += 1
        assert hits >= 99


class TestBeamformingGain:
    def test_zero_channel(self):
        ch = make_channel(np.zeros((2, 2)), noise_var=0.3)
        assert beamforming_gain(ch, np.array([1.0, 0]), np.array([1.0, 0])) == 0.0

    def test_unity_gain(self):
        ch = make_channel([[0.5]], noise_var=0.25)
        assert beamforming_gain(ch, np.array([1.0]), np.array([1.0])) == pytest.approx(1.0)
        assert to_db(1.0) == 0.0

    def test_channel_invariants(self):
        with pytest.raises(ValueError):
            make_channel(np.eye(2), noise_var=1.0)  # rank 2
        with pytest.raises(ValueError):
            make_channel(np.zeros((2, 2)), noise_var=0.0)
