import pytest
from hypothesis import given
from hypothesis import strategies as st

from prosotok.augment import (
    PITCH_SEMITONES,
    RATE_FACTORS,
    TRANSFORMS,
    Transform,
    apply_transform,
    assign_transforms,
    augment_dataset,
    semitone_factor,
    transform_by_id,
)
from prosotok.features import PhoneFeature
from tests.conftest import make_feature_corpus


class TestSemitoneFactor:
    def test_octave_doubles(self):
        assert semitone_factor(12) == 2.0

    def test_zero_is_identity(self):
        assert semitone_factor(0) == 1.0

    def test_minus_six_is_inverse_sqrt_two(self):
        assert semitone_factor(-6) == 2.0 ** (-0.5)

    @given(k=st.integers(min_value=-24, max_value=24))
    def test_inverse_pairs(self, k):
        assert semitone_factor(k) * semitone_factor(-k) == pytest.approx(1.0, rel=1e-15)


class TestTransformSet:
    def test_exactly_twelve_members(self):
        assert len(TRANSFORMS) == 12
        assert len({t.id for t in TRANSFORMS}) == 12
        assert sorted(t.semitones for t in TRANSFORMS if t.kind == "pitch") == sorted(
            PITCH_SEMITONES
        )
        assert sorted(t.rate for t in TRANSFORMS if t.kind == "rate") == sorted(RATE_FACTORS)

    def test_lookup_by_id(self):
        t = transform_by_id("pitch+2")
        assert t.kind == "pitch" and t.semitones == 2
        with pytest.raises(KeyError):
            transform_by_id("nope")

    def test_rate_080_duration_factor_exact(self):
        assert transform_by_id("rate0.80").duration_factor == 1.25


def one_phone(f0=200.0, dur=0.1, utt="u1"):
    return PhoneFeature(utt, 0, "aa", "spk", dur, f0)


class TestApplyTransform:
    def test_pitch_shift_scales_f0_only(self):
        (out,) = apply_transform([one_phone()], transform_by_id("pitch+2"))
        assert out.f0_hz == pytest.approx(224.4924, abs=1e-4)
        assert out.f0_hz == 200.0 * semitone_factor(2)
        assert out.duration_s == 0.1
        assert out.utterance_id == "u1#pitch+2"

    def test_rate_scales_duration_only(self):
        (out,) = apply_transform([one_phone()], transform_by_id("rate0.80"))
        assert out.duration_s == 0.125
        assert out.f0_hz == 200.0

    def test_unvoiced_stays_unvoiced(self):
        (out,) = apply_transform([one_phone(f0=None)], transform_by_id("pitch+6"))
        assert out.f0_hz is None

    def test_identity_rate_hypothetical(self):
        # rate 1.0 is not one of the twelve, but the scaling rule is an identity there
        t = Transform(id="rate1.00", kind="rate", rate=1.0)
        (out,) = apply_transform([one_phone()], t)
        assert out.duration_s == 0.1

    @given(
        durs=st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=12),
        t_index=st.integers(min_value=0, max_value=11),
    )
    def test_duration_ordering_preserved(self, durs, t_index):
        feats = [
            PhoneFeature("u", i, "aa", "spk", d, 150.0) for i, d in enumerate(durs)
        ]
        out = apply_transform(feats, TRANSFORMS[t_index])
        for a, b in zip(feats, feats[1:]):
            ta, tb = out[a.phone_index], out[b.phone_index]
            if a.duration_s < b.duration_s:
                assert ta.duration_s < tb.duration_s
            elif a.duration_s == b.duration_s:
                assert ta.duration_s == tb.duration_s


@pytest.fixture(scope="module")
def corpus():
    return make_feature_corpus(utts_per_speaker=5)


class TestAugmentDataset:
    def test_doubles_the_dataset(self, corpus):
        utts, feats = augment_dataset(corpus.utterances, corpus.features, seed=7)
        assert len(utts) == 2 * len(corpus.utterances)
        assert len(feats) == 2 * len(corpus.features)
        originals = [u for u in utts if u.origin == "original"]
        augmented = [u for u in utts if u.origin == "augmented"]
        assert len(originals) == len(augmented) == len(corpus.utterances)
        assert all(u.transform is not None for u in augmented)

    def test_same_seed_same_assignment(self, corpus):
        a1 = assign_transforms(corpus.utterances, seed=42)
        a2 = assign_transforms(corpus.utterances, seed=42)
        assert [t.id for t in a1] == [t.id for t in a2]
        u1, f1 = augment_dataset(corpus.utterances, corpus.features, seed=42)
        u2, f2 = augment_dataset(corpus.utterances, corpus.features, seed=42)
        assert [u.id for u in u1] == [u.id for u in u2]
        assert f1 == f2

    def test_empty_input(self):
        utts, feats = augment_dataset([], [], seed=1)
        assert utts == [] and feats == []

    def test_range_never_contracts(self, corpus):
        for seed in range(5):
            _, feats = augment_dataset(corpus.utterances, corpus.features, seed=seed)
            orig_f0 = [f.f0_hz for f in corpus.features if f.f0_hz is not None]
            all_f0 = [f.f0_hz for f in feats if f.f0_hz is not None]
            orig_dur = [f.duration_s for f in corpus.features]
            all_dur = [f.duration_s for f in feats]
            assert min(all_f0) <= min(orig_f0) and max(all_f0) >= max(orig_f0)
            assert min(all_dur) <= min(orig_dur) and max(all_dur) >= max(orig_dur)

    def test_forced_pitch_down_lowers_global_min_exactly(self, corpus):
        min_f0 = min(f.f0_hz for f in corpus.features if f.f0_hz is not None)
        holder = next(f.utterance_id for f in corpus.features if f.f0_hz == min_f0)
        utt_index = [u.id for u in corpus.utterances].index(holder)
        seed = next(
            s
            for s in range(10000)
            if assign_transforms(corpus.utterances, seed=s)[utt_index].id == "pitch-6"
        )
        _, feats = augment_dataset(corpus.utterances, corpus.features, seed=seed)
        new_min = min(f.f0_hz for f in feats if f.f0_hz is not None)
        assert new_min == min_f0 * semitone_factor(-6)

    def test_unknown_feature_utterance_rejected(self, corpus):
        stray = [PhoneFeature("ghost", 0, "aa", "spk", 0.1, 100.0)]
        with pytest.raises(ValueError, match="ghost"):
            augment_dataset(corpus.utterances, corpus.features + stray, seed=0)
