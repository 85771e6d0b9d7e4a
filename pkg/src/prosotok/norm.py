"""Per-speaker z-score normalization of F0.

Different speakers occupy different pitch ranges, so per-phone F0 values are
mapped into a shared unitless space (subtract the speaker mean, divide by the
speaker standard deviation) before any pooled clustering. The inverse map
turns shared-space values back into Hz for a given speaker.

sigma is the population standard deviation, not the variance: dividing by a
variance would not produce unit-scale values.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .data import SpeakerStats
from .errors import DegenerateSpeakerError
from .features import PhoneFeature


def stats_from_f0(values: Sequence[float], *, who: str = "speaker") -> SpeakerStats:
    """Fit SpeakerStats from raw voiced F0 values (Hz)."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise DegenerateSpeakerError(
            f"{who}: need at least 2 voiced phones, got {arr.size}"
        )
    mu = float(np.mean(arr))
    sigma = float(np.std(arr))
    if sigma == 0.0:
        raise DegenerateSpeakerError(f"{who}: all F0 values identical ({mu} Hz)")
    return SpeakerStats(mu=mu, sigma=sigma)


def fit_speaker_stats(features: Iterable[PhoneFeature], speaker: str) -> SpeakerStats:
    """Fit stats over all voiced features of one speaker (augmented copies
    included when present in the input)."""
    values = [f.f0_hz for f in features if f.speaker == speaker and f.f0_hz is not None]
    return stats_from_f0(values, who=f"speaker {speaker!r}")


def fit_all_speaker_stats(features: Sequence[PhoneFeature]) -> dict[str, SpeakerStats]:
    """Fit stats for every speaker appearing in the feature list."""
    by_speaker: dict[str, list[float]] = {}
    for f in features:
        if f.f0_hz is not None:
            by_speaker.setdefault(f.speaker, []).append(f.f0_hz)
    return {
        name: stats_from_f0(values, who=f"speaker {name!r}")
        for name, values in sorted(by_speaker.items())
    }


def normalize(f_hz: float, stats: SpeakerStats) -> float:
    return (f_hz - stats.mu) / stats.sigma


def denormalize(z: float, stats: SpeakerStats) -> float:
    return z * stats.sigma + stats.mu
