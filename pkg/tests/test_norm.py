import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prosotok.data import SpeakerStats
from prosotok.errors import DegenerateSpeakerError
from prosotok.features import PhoneFeature
from prosotok.norm import (
    denormalize,
    fit_all_speaker_stats,
    fit_speaker_stats,
    normalize,
    stats_from_f0,
)


def feats(values, speaker="spk"):
    return [
        PhoneFeature(f"u{i}", 0, "aa", speaker, 0.1, v) for i, v in enumerate(values)
    ]


class TestFitStats:
    def test_two_point_population_std(self):
        stats = fit_speaker_stats(feats([180.0, 220.0]), "spk")
        assert stats.mu == 200.0
        assert stats.sigma == 20.0

    def test_three_point_population_std(self):
        values = [100.0, 200.0, 300.0]
        # independent oracle: plain definition of the population std
        mu = sum(values) / len(values)
        sigma = math.sqrt(sum((v - mu) ** 2 for v in values) / len(values))
        stats = fit_speaker_stats(feats(values), "spk")
        assert stats.mu == pytest.approx(mu, abs=0)
        assert stats.sigma == pytest.approx(sigma, rel=1e-15)
        assert stats.sigma == pytest.approx(81.6497, abs=1e-4)

    def test_identical_values_degenerate(self):
        with pytest.raises(DegenerateSpeakerError, match="identical"):
            fit_speaker_stats(feats([150.0, 150.0, 150.0]), "spk")

    def test_single_voiced_phone_degenerate(self):
        with pytest.raises(DegenerateSpeakerError, match="2 voiced"):
            fit_speaker_stats(feats([150.0]), "spk")

    def test_unvoiced_excluded(self):
        rows = feats([180.0, 220.0]) + [PhoneFeature("u9", 0, "s", "spk", 0.1, None)]
        assert fit_speaker_stats(rows, "spk").mu == 200.0

    def test_other_speakers_excluded(self):
        rows = feats([180.0, 220.0]) + feats([1000.0, 2000.0], speaker="other")
        assert fit_speaker_stats(rows, "spk").mu == 200.0

    def test_fit_all_speakers(self):
        rows = feats([180.0, 220.0]) + feats([300.0, 500.0], speaker="b")
        stats = fit_all_speaker_stats(rows)
        assert set(stats) == {"spk", "b"}
        assert stats["b"].mu == 400.0


class TestNormalize:
    def test_identity_at_mean(self):
        assert normalize(200.0, SpeakerStats(200.0, 30.0)) == 0.0

    def test_one_sigma_above(self):
        assert normalize(200.0, SpeakerStats(180.0, 20.0)) == 1.0

    def test_one_sigma_below(self):
        assert normalize(160.0, SpeakerStats(180.0, 20.0)) == -1.0

    def test_denormalize_trivials(self):
        stats = SpeakerStats(180.0, 20.0)
        assert denormalize(-1.0, stats) == 160.0
        assert denormalize(0.0, stats) == 180.0

    def test_round_trip(self):
        stats = SpeakerStats(180.0, 20.0)
        f = 237.5
        assert denormalize(normalize(f, stats), stats) == pytest.approx(f, rel=1e-9)


class TestProperties:
    @given(
        values=st.lists(
            st.floats(min_value=50.0, max_value=600.0), min_size=2, max_size=200
        ).filter(lambda v: max(v) - min(v) > 1e-6)
    )
    def test_normalized_set_has_zero_mean_unit_std(self, values):
        stats = stats_from_f0(values)
        z = np.array([normalize(v, stats) for v in values])
        assert abs(z.mean()) <= 1e-9 * max(1.0, abs(stats.mu) / stats.sigma)
        assert abs(z.std() - 1.0) <= 1e-9

    @given(
        f1=st.floats(min_value=50.0, max_value=600.0),
        f2=st.floats(min_value=50.0, max_value=600.0),
        mu=st.floats(min_value=60.0, max_value=400.0),
        sigma=st.floats(min_value=1.0, max_value=80.0),
    )
    def test_order_preserving(self, f1, f2, mu, sigma):
        stats = SpeakerStats(mu, sigma)
        if f1 < f2:
            assert normalize(f1, stats) < normalize(f2, stats)

    @given(
        z=st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=3, max_size=50).filter(
            lambda v: max(v) - min(v) > 1e-3
        )
    )
    def test_speaker_independence_of_z_distributions(self, z):
        # two speakers realizing the same z-scores produce the same normalized sets
        s1, s2 = SpeakerStats(110.0, 9.0), SpeakerStats(320.0, 40.0)
        f1 = [denormalize(v, s1) for v in z]
        f2 = [denormalize(v, s2) for v in z]
        z1 = [normalize(f, stats_from_f0(f1)) for f in f1]
        z2 = [normalize(f, stats_from_f0(f2)) for f in f2]
        np.testing.assert_allclose(z1, z2, atol=1e-9)
