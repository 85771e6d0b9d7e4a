"""Feature-space dataset augmentation.

Each original utterance receives exactly one of twelve transforms, chosen
uniformly by a seeded generator, doubling the dataset: pitch shifts of
-6/-4/-2/+2/+4/+6 semitones (F0 scaled by 2^(k/12), durations untouched) or
speaking-rate changes of 0.70/0.80/0.90/1.10/1.20/1.30 (durations scaled by
the reciprocal, F0 untouched). Operating on extracted features rather than
waveforms keeps the transforms exact and cheap; augmented copies keep their
speaker and reference the original audio and alignment.

Duration scaling multiplies by a reciprocal computed once per transform, so
the factor for rate 0.80 is exactly 1.25 in floating point (dividing each
duration by 0.8 would be off by one ulp for some values).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Sequence

from .data import ORIGIN_AUGMENTED, Utterance
from .features import PhoneFeature

PITCH_SEMITONES = (-6, -4, -2, 2, 4, 6)
RATE_FACTORS = (0.70, 0.80, 0.90, 1.10, 1.20, 1.30)


def semitone_factor(k: int) -> float:
    """Frequency ratio of a k-semitone shift (equal temperament)."""
    return 2.0 ** (k / 12.0)


@dataclass(frozen=True)
class Transform:
    """One member of the fixed augmentation set."""

    id: str
    kind: str  # "pitch" or "rate"
    semitones: int = 0
    rate: float = 1.0

    @property
    def f0_factor(self) -> float:
        return semitone_factor(self.semitones) if self.kind == "pitch" else 1.0

    @property
    def duration_factor(self) -> float:
        # rate below 1.0 means slower speech, hence longer phones
        return 1.0 / self.rate if self.kind == "rate" else 1.0


TRANSFORMS: tuple[Transform, ...] = tuple(
    [Transform(id=f"pitch{k:+d}", kind="pitch", semitones=k) for k in PITCH_SEMITONES]
    + [Transform(id=f"rate{r:.2f}", kind="rate", rate=r) for r in RATE_FACTORS]
)


def transform_by_id(transform_id: str) -> Transform:
    for t in TRANSFORMS:
        if t.id == transform_id:
            return t
    raise KeyError(transform_id)


def derived_id(utterance_id: str, transform: Transform) -> str:
    return f"{utterance_id}#{transform.id}"


def apply_transform(features: Sequence[PhoneFeature], t: Transform) -> list[PhoneFeature]:
    """Transform one utterance's features; unvoiced phones stay unvoiced and
    records are re-tagged with the derived utterance id."""
    out = []
    for f in features:
        out.append(
            replace(
                f,
                utterance_id=derived_id(f.utterance_id, t),
                duration_s=f.duration_s * t.duration_factor,
                f0_hz=None if f.f0_hz is None else f.f0_hz * t.f0_factor,
            )
        )
    return out


def augmented_utterance(utt: Utterance, t: Transform) -> Utterance:
    """Manifest record for an augmented copy; audio and alignment still point
    at the original files, only the features are transformed."""
    return replace(
        utt, id=derived_id(utt.id, t), origin=ORIGIN_AUGMENTED, transform=t.id
    )


def assign_transforms(utterances: Sequence[Utterance], seed: int) -> list[Transform]:
    """Deterministic uniform draw of one transform per utterance."""
    rng = random.Random(seed)
    return [TRANSFORMS[rng.randrange(len(TRANSFORMS))] for _ in utterances]


def augment_dataset(
    utterances: Sequence[Utterance],
    features: Sequence[PhoneFeature],
    seed: int,
) -> tuple[list[Utterance], list[PhoneFeature]]:
    """Double the dataset: originals followed by one transformed copy each.

    Returns the combined utterance list and the combined feature list;
    features not belonging to any given utterance are rejected.
    """
    by_utt: dict[str, list[PhoneFeature]] = {u.id: [] for u in utterances}
    for f in features:
        if f.utterance_id not in by_utt:
            raise ValueError(f"feature references unknown utterance {f.utterance_id!r}")
        by_utt[f.utterance_id].append(f)

    chosen = assign_transforms(utterances, seed)
    out_utts = list(utterances)
    out_feats = list(features)
    for utt, t in zip(utterances, chosen):
        out_utts.append(augmented_utterance(utt, t))
        out_feats.extend(apply_transform(by_utt[utt.id], t))
    return out_utts, out_feats
