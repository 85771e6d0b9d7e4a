"""Framewise F0 estimation with a voicing decision, for mono PCM audio.

The estimator is YIN-style: per frame, a windowed difference function over
candidate lags is normalized by its cumulative mean (CMNDF), the first dip
below a threshold marks the pitch period, and parabolic interpolation refines
the lag to sub-sample precision. Frames with no dip below the threshold are
unvoiced.

The CMNDF is invariant to scaling the waveform by any positive constant, so
voicing decisions and F0 values do not depend on recording level.

Tracks can be cached per utterance as little-endian binary records: a float64
``hop_s`` header followed by one float32 per frame, NaN marking unvoiced
frames.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import ConfigError, ValidationError


@dataclass(frozen=True, eq=False)
class Waveform:
    """Mono audio samples in [-1, 1] at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise ValidationError(f"sample_rate must be positive, got {self.sample_rate}")
        if len(self.samples) == 0:
            raise ValidationError("waveform must be non-empty")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class PitchConfig:
    """Extraction parameters, defaulting to conventional speech-range values."""

    f_min: float = 50.0
    f_max: float = 600.0
    frame_s: float = 0.040
    hop_s: float = 0.010
    yin_threshold: float = 0.15

    def validate(self, sample_rate: int) -> None:
        if not 0 < self.f_min < self.f_max:
            raise ConfigError(f"need 0 < f_min < f_max, got [{self.f_min}, {self.f_max}]")
        if self.frame_s <= 0 or self.hop_s <= 0:
            raise ConfigError("frame_s and hop_s must be positive")
        if not 0 < self.yin_threshold < 1:
            raise ConfigError(f"yin_threshold must be in (0, 1), got {self.yin_threshold}")
        frame = int(round(self.frame_s * sample_rate))
        # The difference function needs lags up to one f_min period while
        # keeping an integration window at least as long.
        if frame * self.f_min < 2 * sample_rate:
            raise ConfigError(
                f"frame of {frame} samples too short for f_min={self.f_min} Hz "
                f"at {sample_rate} Hz (need >= {2 * sample_rate / self.f_min:.0f})"
            )


@dataclass(frozen=True, eq=False)
class F0Track:
    """Framewise F0 in Hz (NaN = unvoiced), one frame per ``hop_s``."""

    hop_s: float
    f0_hz: np.ndarray

    @property
    def n_frames(self) -> int:
        return len(self.f0_hz)

    @property
    def extent_s(self) -> float:
        """Time span accounted for by the frames (one hop per frame)."""
        return self.n_frames * self.hop_s

    @property
    def voiced(self) -> np.ndarray:
        return ~np.isnan(self.f0_hz)


def extract_f0(wave: Waveform, cfg: PitchConfig = PitchConfig()) -> F0Track:
    """Estimate F0 per frame.

    Args:
        wave: mono audio.
        cfg: extraction parameters; ``cfg.validate`` must pass for the
            waveform's sample rate.

    Returns:
        One frame per hop, ``floor((len - frame) / hop) + 1`` frames in total.
        Audio shorter than one frame yields an empty track.
    """
    cfg.validate(wave.sample_rate)
    sr = wave.sample_rate
    x = np.asarray(wave.samples, dtype=np.float64)
    frame = int(round(cfg.frame_s * sr))
    hop = max(1, int(round(cfg.hop_s * sr)))
    if len(x) < frame:
        return F0Track(hop_s=cfg.hop_s, f0_hz=np.empty(0, dtype=np.float64))

    tau_max = int(math.floor(sr / cfg.f_min))
    tau_min = max(2, int(math.ceil(sr / cfg.f_max)))

    frames = np.lib.stride_tricks.sliding_window_view(x, frame)[::hop]
    cmndf = _cmndf(frames, tau_max)
    f0 = _pick_dips(cmndf, tau_min, tau_max, cfg.yin_threshold, sr)
    return F0Track(hop_s=cfg.hop_s, f0_hz=f0)


def _cmndf(frames: np.ndarray, tau_max: int) -> np.ndarray:
    """Cumulative-mean-normalized difference function for each frame.

    The raw difference d(tau) = sum_{j<W} (x[j] - x[j+tau])^2 uses a constant
    integration window W = frame - tau_max so all lags are comparable. It is
    expanded into energy terms plus a cross-correlation computed via FFT.
    Frames with zero cumulative difference (silence, DC) normalize to 1
    everywhere and therefore come out unvoiced.
    """
    n_frames, frame = frames.shape
    w = frame - tau_max
    fftsize = 1 << (frame - 1).bit_length()

    spec = np.fft.rfft(frames, n=fftsize, axis=1)
    spec_w = np.fft.rfft(frames[:, :w], n=fftsize, axis=1)
    corr = np.fft.irfft(np.conj(spec_w) * spec, n=fftsize, axis=1)[:, : tau_max + 1]

    csum = np.zeros((n_frames, frame + 1))
    np.cumsum(frames**2, axis=1, out=csum[:, 1:])
    energy_w = csum[:, w]
    energy_tau = csum[:, w : w + tau_max + 1] - csum[:, : tau_max + 1]

    diff = energy_w[:, None] + energy_tau - 2.0 * corr
    np.clip(diff, 0.0, None, out=diff)

    out = np.ones_like(diff)
    cum = np.cumsum(diff[:, 1:], axis=1)
    taus = np.arange(1, tau_max + 1, dtype=np.float64)
    valid = cum > 0
    out[:, 1:][valid] = (diff[:, 1:] * taus)[valid] / cum[valid]
    return out


def _pick_dips(
    cmndf: np.ndarray, tau_min: int, tau_max: int, threshold: float, sr: int
) -> np.ndarray:
    """Per frame: first lag dipping below the threshold, walked down to the
    local minimum of that dip and refined parabolically. No dip -> NaN."""
    n_frames = cmndf.shape[0]
    f0 = np.full(n_frames, np.nan)
    below = cmndf[:, tau_min : tau_max + 1] < threshold
    has_dip = below.any(axis=1)
    first = below.argmax(axis=1) + tau_min
    for i in np.flatnonzero(has_dip):
        row = cmndf[i]
        tau = int(first[i])
        while tau + 1 <= tau_max and row[tau + 1] < row[tau]:
            tau += 1
        tau_ref = _parabolic_min(row, tau)
        tau_ref = min(max(tau_ref, float(tau_min)), float(tau_max))
        f0[i] = sr / tau_ref
    return f0


def _parabolic_min(y: np.ndarray, i: int) -> float:
    """Vertex abscissa of the parabola through (i-1, i, i+1); i at the edges."""
    if i <= 0 or i >= len(y) - 1:
        return float(i)
    denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
    if denom == 0.0:
        return float(i)
    return i + 0.5 * (y[i - 1] - y[i + 1]) / denom


# ---------------------------------------------------------------------------
# WAV input
# ---------------------------------------------------------------------------


def read_wav(path: Path | str) -> Waveform:
    """Read a mono PCM WAV (16-bit, 32-bit int, or float) as [-1, 1] samples."""
    sr, data = wavfile.read(path)
    if data.ndim != 1:
        raise ValidationError(f"{path}: expected mono audio, got {data.ndim} channels")
    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:
        samples = data / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValidationError(f"{path}: unsupported sample format {data.dtype}")
    return Waveform(samples=samples, sample_rate=int(sr))


# ---------------------------------------------------------------------------
# Track cache
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<d")


def save_track(track: F0Track, path: Path | str) -> None:
    """Write a track as float64 hop_s + float32 frames (NaN = unvoiced)."""
    payload = _HEADER.pack(track.hop_s) + track.f0_hz.astype("<f4").tobytes()
    Path(path).write_bytes(payload)


def load_track(path: Path | str) -> F0Track:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size or (len(raw) - _HEADER.size) % 4:
        raise ValidationError(f"{path}: truncated F0 cache record")
    (hop_s,) = _HEADER.unpack_from(raw)
    f0 = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).astype(np.float64)
    return F0Track(hop_s=hop_s, f0_hz=f0)


def cache_path(cache_dir: Path | str, utterance_id: str) -> Path:
    return Path(cache_dir) / f"{utterance_id}.f0"
