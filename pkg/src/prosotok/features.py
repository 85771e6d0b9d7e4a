"""Collapse framewise F0 and a phone alignment into per-phone records.

Each phone yields one (mean F0, duration) pair: duration from the alignment,
F0 as the arithmetic mean over voiced frames inside the phone interval.
Frames are attributed to hop-length slots, so the center of frame i sits at
``(i + 0.5) * hop_s``; membership uses half-open intervals ``[start, end)``
to avoid double counting at phone boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import Utterance
from .errors import ValidationError
from .pitch import F0Track

# Phones may overhang the last frame by this much: the extractor emits no
# frame for the final partial analysis window.
TAIL_SLACK_S = 0.05


@dataclass(frozen=True)
class PhoneFeature:
    """Per-phone prosodic measurements for one utterance.

    ``phone_index`` counts phones only (boundaries and punctuation are not
    indexed); ``f0_hz`` is None for phones with no voiced frame.
    """

    utterance_id: str
    phone_index: int
    phone: str
    speaker: str
    duration_s: float
    f0_hz: float | None

    def __post_init__(self) -> None:
        if not self.duration_s > 0:
            raise ValidationError(
                f"utterance {self.utterance_id} phone {self.phone_index}: "
                f"duration must be positive, got {self.duration_s}"
            )

    @property
    def voiced(self) -> bool:
        return self.f0_hz is not None


def phone_features(
    utt: Utterance, track: F0Track, *, tail_slack_s: float = TAIL_SLACK_S
) -> list[PhoneFeature]:
    """One record per phone, in order. Boundary and punctuation symbols
    produce no records."""
    centers = (np.arange(track.n_frames) + 0.5) * track.hop_s
    voiced = track.voiced
    out: list[PhoneFeature] = []
    for idx, ph in enumerate(utt.phones()):
        if ph.end_s > track.extent_s + tail_slack_s:
            raise ValidationError(
                f"utterance {utt.id}: phone {idx} ({ph.label!r}) ends at {ph.end_s:.3f}s, "
                f"beyond the F0 track extent of {track.extent_s:.3f}s"
            )
        inside = (centers >= ph.start_s) & (centers < ph.end_s) & voiced
        f0 = float(np.mean(track.f0_hz[inside])) if inside.any() else None
        out.append(
            PhoneFeature(
                utterance_id=utt.id,
                phone_index=idx,
                phone=ph.label,
                speaker=utt.speaker,
                duration_s=ph.end_s - ph.start_s,
                f0_hz=f0,
            )
        )
    return out


# ---------------------------------------------------------------------------
# features.tsv
# ---------------------------------------------------------------------------

_COLUMNS = ("utterance_id", "phone_index", "phone", "speaker", "duration_s", "f0_hz")


def write_features_tsv(path: Path | str, features: Sequence[PhoneFeature]) -> None:
    """Write features as TSV; the f0_hz cell is empty for unvoiced phones."""
    lines = ["\t".join(_COLUMNS)]
    for f in features:
        f0_cell = repr(f.f0_hz) if f.f0_hz is not None else ""
        lines.append(
            f"{f.utterance_id}\t{f.phone_index}\t{f.phone}\t{f.speaker}"
            f"\t{f.duration_s!r}\t{f0_cell}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_features_tsv(path: Path | str) -> list[PhoneFeature]:
    out: list[PhoneFeature] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != _COLUMNS:
            raise ValidationError(f"{path}: unexpected features header {header}")
        for lineno, raw in enumerate(fh, 2):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            if len(cells) != len(_COLUMNS):
                raise ValidationError(f"{path}: line {lineno}: expected {len(_COLUMNS)} cells")
            try:
                out.append(
                    PhoneFeature(
                        utterance_id=cells[0],
                        phone_index=int(cells[1]),
                        phone=cells[2],
                        speaker=cells[3],
                        duration_s=float(cells[4]),
                        f0_hz=float(cells[5]) if cells[5] else None,
                    )
                )
            except ValueError as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    return out


def group_by_utterance(features: Sequence[PhoneFeature]) -> dict[str, list[PhoneFeature]]:
    """Group features by utterance id, preserving phone order."""
    grouped: dict[str, list[PhoneFeature]] = {}
    for f in features:
        grouped.setdefault(f.utterance_id, []).append(f)
    return grouped
