"""Domain types and the file formats that carry them between pipeline stages.

Formats:
- ``manifest.jsonl``: one utterance per line,
  ``{"id", "speaker", "audio", "alignment", "origin", "transform"}``.
  ``audio`` and ``alignment`` paths are resolved relative to the manifest.
- alignment ``.tsv``: one symbol per row, ``P<TAB>label<TAB>start_s<TAB>end_s``
  for phones, ``B<TAB>#`` for word boundaries, ``X<TAB><mark>`` for punctuation.
- ``model.json``: versioned prosody model, numbers in shortest
  round-trippable decimal form (two consecutive saves are byte-identical).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import UnsupportedVersionError, ValidationError

MODEL_VERSION = 1

# Adjacent phones may overlap by up to this much (alignment jitter).
OVERLAP_TOL_S = 1e-6

ORIGIN_ORIGINAL = "original"
ORIGIN_AUGMENTED = "augmented"


class SymbolKind(enum.Enum):
    PHONE = "P"
    WORD_BOUNDARY = "B"
    PUNCTUATION = "X"


@dataclass(frozen=True)
class AlignedSymbol:
    """One item of an utterance's symbol sequence.

    Only phones carry a time interval; boundaries and punctuation are
    zero-width marks between phones.
    """

    kind: SymbolKind
    label: str
    start_s: float | None = None
    end_s: float | None = None

    def __post_init__(self) -> None:
        if not self.label:
            raise ValidationError("symbol label must be non-empty")
        if self.kind is SymbolKind.PHONE:
            if self.start_s is None or self.end_s is None:
                raise ValidationError(f"phone {self.label!r} needs start_s and end_s")
            if not self.end_s > self.start_s:
                raise ValidationError(
                    f"phone {self.label!r}: end_s ({self.end_s}) must exceed "
                    f"start_s ({self.start_s})"
                )
        elif self.start_s is not None or self.end_s is not None:
            raise ValidationError(f"{self.kind.name} {self.label!r} must not carry times")

    @property
    def duration_s(self) -> float:
        if self.kind is not SymbolKind.PHONE:
            raise ValidationError(f"{self.kind.name} has no duration")
        return self.end_s - self.start_s


@dataclass(frozen=True)
class Utterance:
    """A recording plus its aligned symbol sequence.

    ``origin`` is ``"augmented"`` (with a transform id) for feature-space
    augmented copies, ``"original"`` otherwise.
    """

    id: str
    speaker: str
    audio_path: Path
    symbols: tuple[AlignedSymbol, ...]
    origin: str = ORIGIN_ORIGINAL
    transform: str | None = None
    alignment_path: Path | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("utterance id must be non-empty")
        if self.origin not in (ORIGIN_ORIGINAL, ORIGIN_AUGMENTED):
            raise ValidationError(f"utterance {self.id}: unknown origin {self.origin!r}")
        if (self.origin == ORIGIN_AUGMENTED) != (self.transform is not None):
            raise ValidationError(
                f"utterance {self.id}: origin {self.origin!r} inconsistent with "
                f"transform {self.transform!r}"
            )
        phones = self.phones()
        if not phones:
            raise ValidationError(f"utterance {self.id}: no phones in alignment")
        for prev, cur in zip(phones, phones[1:]):
            if cur.start_s < prev.end_s - OVERLAP_TOL_S:
                raise ValidationError(
                    f"utterance {self.id}: overlapping phone intervals "
                    f"({prev.label!r} ends {prev.end_s}, {cur.label!r} starts {cur.start_s})"
                )

    def phones(self) -> list[AlignedSymbol]:
        return [s for s in self.symbols if s.kind is SymbolKind.PHONE]

    @property
    def n_phones(self) -> int:
        return len(self.phones())


@dataclass(frozen=True)
class SpeakerStats:
    """Mean and standard deviation of one speaker's voiced per-phone F0, in Hz."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class DurationIntervals:
    """Equal-count duration quantizer for one phone label.

    ``boundaries`` (ascending, length k-1) separate the k intervals;
    ``representatives`` (ascending, length k) are the interval means, in seconds.
    """

    boundaries: tuple[float, ...]
    representatives: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.boundaries) != len(self.representatives) - 1:
            raise ValidationError(
                f"{len(self.representatives)} representatives need "
                f"{len(self.representatives) - 1} boundaries, got {len(self.boundaries)}"
            )
        if any(b2 < b1 for b1, b2 in zip(self.boundaries, self.boundaries[1:])):
            raise ValidationError("interval boundaries must be non-decreasing")
        if any(r2 <= r1 for r1, r2 in zip(self.representatives, self.representatives[1:])):
            raise ValidationError("interval representatives must be strictly ascending")

    @property
    def k(self) -> int:
        return len(self.representatives)


@dataclass(frozen=True)
class ProsodyModel:
    """Universal prosody quantizer: shared F0 centroids in normalized space,
    per-phone duration intervals, and the per-speaker stats that map each
    speaker into and out of the shared space."""

    k_f0: int
    k_dur: int
    f0_centroids: tuple[float, ...]
    dur_intervals: dict[str, DurationIntervals]
    dur_global: DurationIntervals | None
    speakers: dict[str, SpeakerStats]
    version: int = MODEL_VERSION

    def __post_init__(self) -> None:
        if len(self.f0_centroids) != self.k_f0:
            raise ValidationError(
                f"expected {self.k_f0} F0 centroids, got {len(self.f0_centroids)}"
            )
        if any(c2 <= c1 for c1, c2 in zip(self.f0_centroids, self.f0_centroids[1:])):
            raise ValidationError("F0 centroids must be strictly ascending")
        for phone, iv in self.dur_intervals.items():
            if iv.k != self.k_dur:
                raise ValidationError(
                    f"phone {phone!r}: expected {self.k_dur} intervals, got {iv.k}"
                )
        if self.dur_global is not None and self.dur_global.k != self.k_dur:
            raise ValidationError(
                f"global fallback: expected {self.k_dur} intervals, got {self.dur_global.k}"
            )

    def intervals_for(self, phone: str) -> DurationIntervals | None:
        return self.dur_intervals.get(phone, self.dur_global)


@dataclass(frozen=True)
class TokenSequence:
    """Per-utterance prosody tokens, one F0 and one duration token per phone."""

    utterance_id: str
    f0_tokens: tuple[int, ...]
    dur_tokens: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.f0_tokens) != len(self.dur_tokens):
            raise ValidationError(
                f"utterance {self.utterance_id}: token lists differ in length "
                f"({len(self.f0_tokens)} vs {len(self.dur_tokens)})"
            )


# ---------------------------------------------------------------------------
# Alignment files
# ---------------------------------------------------------------------------


def read_alignment(path: Path) -> tuple[AlignedSymbol, ...]:
    """Parse an alignment TSV into a symbol sequence."""
    symbols: list[AlignedSymbol] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            kind_code = cells[0]
            try:
                if kind_code == "P":
                    if len(cells) != 4:
                        raise ValidationError("phone rows need label, start_s, end_s")
                    symbols.append(
                        AlignedSymbol(
                            SymbolKind.PHONE, cells[1], float(cells[2]), float(cells[3])
                        )
                    )
                elif kind_code == "B":
                    if len(cells) != 2:
                        raise ValidationError("boundary rows carry a single mark")
                    symbols.append(AlignedSymbol(SymbolKind.WORD_BOUNDARY, cells[1]))
                elif kind_code == "X":
                    if len(cells) != 2:
                        raise ValidationError("punctuation rows carry a single mark")
                    symbols.append(AlignedSymbol(SymbolKind.PUNCTUATION, cells[1]))
                else:
                    raise ValidationError(f"unknown symbol kind {kind_code!r}")
            except (ValidationError, ValueError) as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    return tuple(symbols)


def write_alignment(path: Path, symbols: tuple[AlignedSymbol, ...] | list[AlignedSymbol]) -> None:
    """Write an alignment TSV (seconds with six fractional digits)."""
    lines = []
    for sym in symbols:
        if sym.kind is SymbolKind.PHONE:
            lines.append(f"P\t{sym.label}\t{sym.start_s:.6f}\t{sym.end_s:.6f}")
        else:
            lines.append(f"{sym.kind.value}\t{sym.label}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------

_MANIFEST_KEYS = {"id", "speaker", "audio", "alignment"}


def load_manifest(path: Path | str) -> list[Utterance]:
    """Load a JSONL manifest, resolving and parsing each alignment file.

    Raises ValidationError naming the offending line for malformed records
    and the offending utterance id for alignment invariant violations.
    """
    path = Path(path)
    base = path.parent
    utterances: list[Utterance] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: line {lineno}: malformed JSON: {exc}") from exc
            if not isinstance(rec, dict) or not _MANIFEST_KEYS.issubset(rec):
                missing = _MANIFEST_KEYS - set(rec) if isinstance(rec, dict) else _MANIFEST_KEYS
                raise ValidationError(
                    f"{path}: line {lineno}: manifest record missing keys {sorted(missing)}"
                )
            utt_id = str(rec["id"])
            if utt_id in seen:
                raise ValidationError(f"{path}: line {lineno}: duplicate utterance id {utt_id!r}")
            seen.add(utt_id)
            alignment_path = _resolve(base, rec["alignment"])
            try:
                symbols = read_alignment(alignment_path)
            except ValidationError as exc:
                raise ValidationError(f"utterance {utt_id!r}: {exc}") from exc
            utterances.append(
                Utterance(
                    id=utt_id,
                    speaker=str(rec["speaker"]),
                    audio_path=_resolve(base, rec["audio"]),
                    symbols=symbols,
                    origin=rec.get("origin", ORIGIN_ORIGINAL),
                    transform=rec.get("transform"),
                    alignment_path=alignment_path,
                )
            )
    return utterances


def save_manifest(path: Path | str, utterances: list[Utterance]) -> None:
    """Write a JSONL manifest. Paths are written as stored (already resolved)."""
    lines = []
    for u in utterances:
        if u.alignment_path is None:
            raise ValidationError(f"utterance {u.id}: no alignment path to write")
        rec = {
            "id": u.id,
            "speaker": u.speaker,
            "audio": str(u.audio_path),
            "alignment": str(u.alignment_path),
            "origin": u.origin,
            "transform": u.transform,
        }
        lines.append(json.dumps(rec, sort_keys=True))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def _resolve(base: Path, p: str) -> Path:
    q = Path(p)
    return q if q.is_absolute() else base / q


# ---------------------------------------------------------------------------
# Model persistence
# ---------------------------------------------------------------------------


def save_model(model: ProsodyModel, path: Path | str) -> None:
    """Serialize a model to canonical JSON (sorted keys, repr floats)."""
    doc = {
        "version": model.version,
        "k_f0": model.k_f0,
        "k_dur": model.k_dur,
        "f0_centroids": list(model.f0_centroids),
        "dur_intervals": {
            phone: _intervals_to_json(iv) for phone, iv in model.dur_intervals.items()
        },
        "dur_global": _intervals_to_json(model.dur_global) if model.dur_global else None,
        "speakers": {
            name: {"mu": s.mu, "sigma": s.sigma} for name, s in model.speakers.items()
        },
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_model(path: Path | str) -> ProsodyModel:
    """Load and validate a model file; load(save(m)) reproduces m exactly."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("version")
    if version != MODEL_VERSION:
        raise UnsupportedVersionError(
            f"{path}: model version {version!r} not supported (expected {MODEL_VERSION})"
        )
    try:
        return ProsodyModel(
            k_f0=doc["k_f0"],
            k_dur=doc["k_dur"],
            f0_centroids=tuple(doc["f0_centroids"]),
            dur_intervals={
                phone: _intervals_from_json(entry)
                for phone, entry in doc["dur_intervals"].items()
            },
            dur_global=_intervals_from_json(doc["dur_global"]) if doc["dur_global"] else None,
            speakers={
                name: SpeakerStats(mu=s["mu"], sigma=s["sigma"])
                for name, s in doc["speakers"].items()
            },
        )
    except KeyError as exc:
        raise ValidationError(f"{path}: model file missing field {exc}") from exc


def _intervals_to_json(iv: DurationIntervals) -> dict:
    return {"boundaries": list(iv.boundaries), "representatives": list(iv.representatives)}


def _intervals_from_json(entry: dict) -> DurationIntervals:
    return DurationIntervals(
        boundaries=tuple(entry["boundaries"]),
        representatives=tuple(entry["representatives"]),
    )
