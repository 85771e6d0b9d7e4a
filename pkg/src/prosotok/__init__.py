"""Phoneme-level prosody tokenization: per-phone F0/duration extraction,
per-speaker normalization, feature-space augmentation, universal clustering,
controllable token sequences, and frozen-model speaker adaptation."""

from .augment import TRANSFORMS, Transform, apply_transform, augment_dataset, semitone_factor
from .cluster import balanced_intervals, fit_model, kmeans_1d
from .coverage import CoverageResult, select_cover
from .data import (
    AlignedSymbol,
    DurationIntervals,
    ProsodyModel,
    SpeakerStats,
    SymbolKind,
    TokenSequence,
    Utterance,
    load_manifest,
    load_model,
    save_manifest,
    save_model,
)
from .errors import (
    ConfigError,
    DegenerateSpeakerError,
    InsufficientDataError,
    ProsotokError,
    UnsupportedVersionError,
    UsageError,
    ValidationError,
)
from .features import PhoneFeature, phone_features, read_features_tsv, write_features_tsv
from .labeling import (
    ControlSpec,
    adapt_speaker,
    apply_control,
    ascending_report,
    decode_tokens,
    label_utterance,
)
from .norm import denormalize, fit_speaker_stats, normalize
from .pitch import F0Track, PitchConfig, Waveform, extract_f0, read_wav

__version__ = "0.1.0"

__all__ = [
    "AlignedSymbol",
    "ConfigError",
    "ControlSpec",
    "CoverageResult",
    "DegenerateSpeakerError",
    "DurationIntervals",
    "F0Track",
    "InsufficientDataError",
    "PhoneFeature",
    "PitchConfig",
    "ProsodyModel",
    "ProsotokError",
    "SpeakerStats",
    "SymbolKind",
    "TokenSequence",
    "TRANSFORMS",
    "Transform",
    "UnsupportedVersionError",
    "UsageError",
    "Utterance",
    "ValidationError",
    "Waveform",
    "adapt_speaker",
    "apply_control",
    "apply_transform",
    "ascending_report",
    "augment_dataset",
    "balanced_intervals",
    "decode_tokens",
    "denormalize",
    "extract_f0",
    "fit_model",
    "fit_speaker_stats",
    "kmeans_1d",
    "label_utterance",
    "load_manifest",
    "load_model",
    "normalize",
    "phone_features",
    "read_features_tsv",
    "read_wav",
    "save_manifest",
    "save_model",
    "select_cover",
    "semitone_factor",
    "write_features_tsv",
]
