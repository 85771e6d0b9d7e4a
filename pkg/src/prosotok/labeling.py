"""Token assignment, offset control, the ascending-cluster report, and
adaptation of new speakers onto a frozen model.

Per phone, the F0 token is the index of the nearest centroid to the
speaker-normalized mean F0 and the duration token is the equal-count
interval the duration falls in. Word boundaries and punctuation receive no
tokens, so an utterance with N symbols and M phones gets token lists of
length M < N whenever marks are present.

Unvoiced phones have no F0 of their own; they take the F0 token of the
nearest voiced phone in the utterance (by phone index, earlier phone
preferred on ties), or the token closest to the speaker mean when the whole
utterance is unvoiced.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .data import ProsodyModel, TokenSequence, Utterance
from .errors import ValidationError
from .features import PhoneFeature
from .norm import denormalize, normalize, stats_from_f0

MAX_ABS_OFFSET = 11


@dataclass(frozen=True)
class ControlSpec:
    """Requested manipulation of a token sequence.

    Per feature, either an offset added to every token (clamped into range)
    or a single fixed cluster id applied to every token; the two modes are
    mutually exclusive per feature, and a feature with neither keeps its
    ground-truth tokens.
    """

    f0_offset: int | None = None
    dur_offset: int | None = None
    fixed_f0_cluster: int | None = None
    fixed_dur_cluster: int | None = None

    def __post_init__(self) -> None:
        if self.f0_offset is not None and self.fixed_f0_cluster is not None:
            raise ValidationError("f0 offset and fixed f0 cluster are mutually exclusive")
        if self.dur_offset is not None and self.fixed_dur_cluster is not None:
            raise ValidationError("dur offset and fixed dur cluster are mutually exclusive")
        for name, off in (("f0_offset", self.f0_offset), ("dur_offset", self.dur_offset)):
            if off is not None and abs(off) > MAX_ABS_OFFSET:
                raise ValidationError(
                    f"{name} must be within [-{MAX_ABS_OFFSET}, +{MAX_ABS_OFFSET}], got {off}"
                )
        for name, fixed in (
            ("fixed_f0_cluster", self.fixed_f0_cluster),
            ("fixed_dur_cluster", self.fixed_dur_cluster),
        ):
            if fixed is not None and fixed < 0:
                raise ValidationError(f"{name} must be non-negative, got {fixed}")


def label_utterance(
    utt: Utterance,
    features: Sequence[PhoneFeature],
    model: ProsodyModel,
    speaker: str,
) -> TokenSequence:
    """Assign one F0 and one duration token to every phone of the utterance."""
    stats = model.speakers.get(speaker)
    if stats is None:
        raise ValidationError(f"unknown speaker {speaker!r} (not in model)")
    phones = utt.phones()
    if len(features) != len(phones):
        raise ValidationError(
            f"utterance {utt.id}: {len(features)} feature records for "
            f"{len(phones)} phones"
        )

    centroids = np.asarray(model.f0_centroids)
    voiced_tokens: dict[int, int] = {}
    for i, f in enumerate(features):
        if f.f0_hz is not None:
            z = normalize(f.f0_hz, stats)
            voiced_tokens[i] = int(np.abs(centroids - z).argmin())

    f0_tokens: list[int] = []
    for i in range(len(features)):
        if i in voiced_tokens:
            f0_tokens.append(voiced_tokens[i])
        elif voiced_tokens:
            nearest = min(voiced_tokens, key=lambda j: (abs(j - i), j))
            f0_tokens.append(voiced_tokens[nearest])
        else:
            f0_tokens.append(int(np.abs(centroids).argmin()))

    dur_tokens: list[int] = []
    for i, f in enumerate(features):
        iv = model.intervals_for(f.phone)
        if iv is None:
            raise ValidationError(
                f"utterance {utt.id}: phone {f.phone!r} not in model and no "
                f"global duration fallback"
            )
        # values equal to a boundary go to the right interval
        dur_tokens.append(int(np.searchsorted(iv.boundaries, f.duration_s, side="right")))

    return TokenSequence(
        utterance_id=utt.id, f0_tokens=tuple(f0_tokens), dur_tokens=tuple(dur_tokens)
    )


def decode_tokens(
    tokens: TokenSequence,
    model: ProsodyModel,
    speaker: str,
    phones: Sequence[str],
) -> list[tuple[float, float]]:
    """Decode tokens back to per-phone (f0_hz, duration_s).

    ``phones`` lists the phone label per token position, needed to pick each
    phone's duration representatives.
    """
    stats = model.speakers.get(speaker)
    if stats is None:
        raise ValidationError(f"unknown speaker {speaker!r} (not in model)")
    if len(phones) != len(tokens.f0_tokens):
        raise ValidationError(
            f"utterance {tokens.utterance_id}: {len(phones)} phone labels for "
            f"{len(tokens.f0_tokens)} tokens"
        )
    out: list[tuple[float, float]] = []
    for f0_tok, dur_tok, phone in zip(tokens.f0_tokens, tokens.dur_tokens, phones):
        if not 0 <= f0_tok < model.k_f0:
            raise ValidationError(
                f"f0 token {f0_tok} out of range [0, {model.k_f0 - 1}]"
            )
        if not 0 <= dur_tok < model.k_dur:
            raise ValidationError(
                f"duration token {dur_tok} out of range [0, {model.k_dur - 1}]"
            )
        iv = model.intervals_for(phone)
        if iv is None:
            raise ValidationError(
                f"phone {phone!r} not in model and no global duration fallback"
            )
        out.append(
            (denormalize(model.f0_centroids[f0_tok], stats), iv.representatives[dur_tok])
        )
    return out


def apply_control(
    tokens: TokenSequence,
    spec: ControlSpec,
    k_f0: int = 15,
    k_dur: int = 15,
) -> TokenSequence:
    """Apply offsets (clamped into [0, k-1]) or fixed clusters per feature."""
    f0 = list(tokens.f0_tokens)
    dur = list(tokens.dur_tokens)
    if spec.fixed_f0_cluster is not None:
        if spec.fixed_f0_cluster >= k_f0:
            raise ValidationError(
                f"fixed f0 cluster {spec.fixed_f0_cluster} out of range [0, {k_f0 - 1}]"
            )
        f0 = [spec.fixed_f0_cluster] * len(f0)
    elif spec.f0_offset is not None:
        f0 = [min(max(t + spec.f0_offset, 0), k_f0 - 1) for t in f0]
    if spec.fixed_dur_cluster is not None:
        if spec.fixed_dur_cluster >= k_dur:
            raise ValidationError(
                f"fixed dur cluster {spec.fixed_dur_cluster} out of range [0, {k_dur - 1}]"
            )
        dur = [spec.fixed_dur_cluster] * len(dur)
    elif spec.dur_offset is not None:
        dur = [min(max(t + spec.dur_offset, 0), k_dur - 1) for t in dur]
    return replace(tokens, f0_tokens=tuple(f0), dur_tokens=tuple(dur))


def ascending_report(
    utterances: Sequence[Utterance],
    features_by_utt: Mapping[str, Sequence[PhoneFeature]],
    model: ProsodyModel,
    speaker: str,
) -> list[tuple[int, float, float]]:
    """Sweep each prosodic feature through cluster ids 0..k-1.

    For every cluster id, one feature's tokens are fixed to that id while the
    other feature keeps its ground-truth tokens, the result is decoded, and
    the decoded values are averaged over all phones of all utterances.
    Returns rows (cluster_id, mean_f0_hz, mean_dur_s); empty input yields an
    empty table.
    """
    if not utterances:
        return []
    ground_truth = []
    for utt in utterances:
        feats = features_by_utt.get(utt.id)
        if feats is None:
            raise ValidationError(f"no features for utterance {utt.id!r}")
        phones = [f.phone for f in feats]
        ground_truth.append((utt, phones, label_utterance(utt, feats, model, speaker)))

    rows: list[tuple[int, float, float]] = []
    for cluster in range(max(model.k_f0, model.k_dur)):
        f0_values: list[float] = []
        dur_values: list[float] = []
        for _, phones, tokens in ground_truth:
            if cluster < model.k_f0:
                fixed = apply_control(
                    tokens, ControlSpec(fixed_f0_cluster=cluster), model.k_f0, model.k_dur
                )
                f0_values.extend(
                    f0 for f0, _ in decode_tokens(fixed, model, speaker, phones)
                )
            if cluster < model.k_dur:
                fixed = apply_control(
                    tokens, ControlSpec(fixed_dur_cluster=cluster), model.k_f0, model.k_dur
                )
                dur_values.extend(
                    d for _, d in decode_tokens(fixed, model, speaker, phones)
                )
        rows.append(
            (
                cluster,
                float(np.mean(f0_values)) if f0_values else float("nan"),
                float(np.mean(dur_values)) if dur_values else float("nan"),
            )
        )
    return rows


def adapt_speaker(
    model: ProsodyModel,
    new_speaker_features: Sequence[PhoneFeature],
    speaker_id: str,
    *,
    replace_existing: bool = False,
) -> ProsodyModel:
    """Extend a fitted model with a new speaker without refitting anything.

    Centroids and duration intervals are reused as pretrained values; only
    the speaker stats map grows. Every voiced feature passed is treated as
    the new speaker's data (augmented copies included when provided).
    """
    if speaker_id in model.speakers and not replace_existing:
        raise ValidationError(
            f"speaker {speaker_id!r} already in model (pass replace to overwrite)"
        )
    stats = stats_from_f0(
        [f.f0_hz for f in new_speaker_features if f.f0_hz is not None],
        who=f"speaker {speaker_id!r}",
    )
    speakers = dict(model.speakers)
    speakers[speaker_id] = stats
    return replace(model, speakers=dict(sorted(speakers.items())))


# ---------------------------------------------------------------------------
# tokens.jsonl
# ---------------------------------------------------------------------------


def save_tokens(path: Path | str, sequences: Sequence[TokenSequence]) -> None:
    lines = [
        json.dumps(
            {"id": t.utterance_id, "f0": list(t.f0_tokens), "dur": list(t.dur_tokens)},
            sort_keys=True,
        )
        for t in sequences
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_tokens(path: Path | str) -> list[TokenSequence]:
    out: list[TokenSequence] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
                out.append(
                    TokenSequence(
                        utterance_id=rec["id"],
                        f0_tokens=tuple(int(t) for t in rec["f0"]),
                        dur_tokens=tuple(int(t) for t in rec["dur"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValidationError(f"{path}: line {lineno}: malformed token record: {exc}")
    return out
