"""Shared fixtures: synthetic corpora (feature tables and sine-based audio)
plus a terminal summary that prints one pass/fail line per acceptance
criterion."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings
from scipy.io import wavfile

from prosotok.data import AlignedSymbol, SymbolKind, Utterance, write_alignment
from prosotok.features import PhoneFeature

settings.register_profile("repo", deadline=None, derandomize=True)
settings.load_profile("repo")

PHONE_INVENTORY = ("aa", "eh", "iy", "ow", "uw", "n", "m", "s", "t", "k")
UNVOICED_PHONES = ("s", "t", "k")

SAMPLE_RATE = 24000


# ---------------------------------------------------------------------------
# feature-table corpus (no audio, exact control over speaker stats)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureCorpus:
    utterances: list[Utterance]
    features: list[PhoneFeature]
    speaker_params: dict[str, tuple[float, float]]

    def features_of(self, utterance_id: str) -> list[PhoneFeature]:
        return [f for f in self.features if f.utterance_id == utterance_id]

    def by_utterance(self) -> dict[str, list[PhoneFeature]]:
        grouped: dict[str, list[PhoneFeature]] = {}
        for f in self.features:
            grouped.setdefault(f.utterance_id, []).append(f)
        return grouped


def make_feature_corpus(
    seed: int = 1234,
    speaker_params: dict[str, tuple[float, float]] | None = None,
    utts_per_speaker: int = 22,
    phones_per_utt: int = 10,
) -> FeatureCorpus:
    """Directly synthesized per-phone feature tables for >= 3 speakers.

    Speaker F0 is Gaussian around (mu, sigma); durations have a per-phone
    base scale so per-phone interval fitting is meaningful. Some obstruent
    phones come out unvoiced.
    """
    if speaker_params is None:
        speaker_params = {
            "low": (100.0, 6.0),
            "mid": (200.0, 10.0),
            "high": (400.0, 12.0),
        }
    rng = np.random.default_rng(seed)
    base_dur = {p: 0.05 + 0.012 * i for i, p in enumerate(PHONE_INVENTORY)}

    utterances: list[Utterance] = []
    features: list[PhoneFeature] = []
    for speaker, (mu, sigma) in speaker_params.items():
        for u in range(utts_per_speaker):
            utt_id = f"{speaker}_{u:03d}"
            labels = [
                PHONE_INVENTORY[rng.integers(len(PHONE_INVENTORY))]
                for _ in range(phones_per_utt)
            ]
            symbols: list[AlignedSymbol] = []
            t = 0.0
            for i, label in enumerate(labels):
                dur = base_dur[label] * rng.uniform(0.8, 1.25)
                symbols.append(AlignedSymbol(SymbolKind.PHONE, label, t, t + dur))
                t += dur
                if i % 3 == 2 and i + 1 < len(labels):
                    symbols.append(AlignedSymbol(SymbolKind.WORD_BOUNDARY, "#"))
            symbols.append(AlignedSymbol(SymbolKind.PUNCTUATION, "."))
            utt = Utterance(
                id=utt_id,
                speaker=speaker,
                audio_path=Path(f"{utt_id}.wav"),
                symbols=tuple(symbols),
            )
            utterances.append(utt)
            for i, ph in enumerate(utt.phones()):
                unvoiced = ph.label in UNVOICED_PHONES and rng.random() < 0.5
                f0 = None if unvoiced else float(np.clip(rng.normal(mu, sigma), 60.0, 580.0))
                features.append(
                    PhoneFeature(
                        utterance_id=utt_id,
                        phone_index=i,
                        phone=ph.label,
                        speaker=speaker,
                        duration_s=ph.duration_s,
                        f0_hz=f0,
                    )
                )
    return FeatureCorpus(utterances, features, dict(speaker_params))


@pytest.fixture(scope="session")
def feature_corpus() -> FeatureCorpus:
    return make_feature_corpus()


# ---------------------------------------------------------------------------
# sine-based audio corpus (drives the real extract/features path)
# ---------------------------------------------------------------------------


def sine_segment(freq: float, dur_s: float, sr: int = SAMPLE_RATE, amp: float = 0.4) -> np.ndarray:
    t = np.arange(int(round(dur_s * sr))) / sr
    return amp * np.sin(2.0 * np.pi * freq * t)


def write_wav(path: Path, samples: np.ndarray, sr: int = SAMPLE_RATE) -> None:
    pcm = np.clip(samples * 32767.0, -32768, 32767).astype(np.int16)
    wavfile.write(path, sr, pcm)


def build_audio_corpus(
    root: Path,
    speaker_params: dict[str, tuple[float, float]] | None = None,
    utts_per_speaker: int = 8,
    seed: int = 99,
) -> Path:
    """Write wavs, alignment TSVs and a manifest; returns the manifest path.

    Each phone is a constant-frequency sine drawn from the speaker's F0
    distribution; words are separated by short silences (word boundaries in
    the alignment); each utterance ends with a punctuation mark.
    """
    if speaker_params is None:
        speaker_params = {"male": (110.0, 8.0), "female": (260.0, 14.0), "alto": (180.0, 10.0)}
    rng = np.random.default_rng(seed)
    (root / "wav").mkdir(parents=True, exist_ok=True)
    (root / "align").mkdir(parents=True, exist_ok=True)
    records = []
    for speaker, (mu, sigma) in speaker_params.items():
        for u in range(utts_per_speaker):
            utt_id = f"{speaker}_{u:03d}"
            n_phones = int(rng.integers(5, 9))
            labels = [
                PHONE_INVENTORY[rng.integers(len(PHONE_INVENTORY))] for _ in range(n_phones)
            ]
            chunks: list[np.ndarray] = []
            symbols: list[AlignedSymbol] = []
            t = 0.0
            for i, label in enumerate(labels):
                dur = round(float(rng.uniform(0.09, 0.2)), 3)
                freq = float(np.clip(rng.normal(mu, sigma), 70.0, 500.0))
                chunks.append(sine_segment(freq, dur))
                symbols.append(AlignedSymbol(SymbolKind.PHONE, label, round(t, 6), round(t + dur, 6)))
                t += dur
                if i % 3 == 1 and i + 1 < n_phones:
                    gap = 0.05
                    chunks.append(np.zeros(int(round(gap * SAMPLE_RATE))))
                    symbols.append(AlignedSymbol(SymbolKind.WORD_BOUNDARY, "#"))
                    t += gap
            symbols.append(AlignedSymbol(SymbolKind.PUNCTUATION, "."))
            chunks.append(np.zeros(int(round(0.06 * SAMPLE_RATE))))  # track tail headroom
            write_wav(root / "wav" / f"{utt_id}.wav", np.concatenate(chunks))
            write_alignment(root / "align" / f"{utt_id}.tsv", symbols)
            records.append(
                {
                    "id": utt_id,
                    "speaker": speaker,
                    "audio": f"wav/{utt_id}.wav",
                    "alignment": f"align/{utt_id}.tsv",
                    "origin": "original",
                    "transform": None,
                }
            )
    manifest = root / "manifest.jsonl"
    manifest.write_text("\n".join(json.dumps(r, sort_keys=True) for r in records) + "\n")
    return manifest


@pytest.fixture(scope="session")
def audio_corpus(tmp_path_factory: pytest.TempPathFactory) -> Path:
    root = tmp_path_factory.mktemp("toy_corpus")
    return build_audio_corpus(root)


# ---------------------------------------------------------------------------
# acceptance summary
# ---------------------------------------------------------------------------

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report: pytest.TestReport) -> None:
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _acceptance_outcomes[name] = report.outcome
    elif report.outcome != "passed":  # setup/teardown error
        _acceptance_outcomes.setdefault(name, report.outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_outcomes):
        outcome = _acceptance_outcomes[name]
        verdict = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            outcome, outcome.upper()
        )
        terminalreporter.write_line(f"{verdict}  {name}")
