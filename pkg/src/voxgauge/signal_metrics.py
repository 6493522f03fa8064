"""Reference-free signal metrics: blind SNR and frame-energy statistics.

The SNR estimator is the waveform-amplitude-distribution method: speech
amplitudes behave like a Gamma distribution with shape 0.4 while additive
noise is near-Gaussian, so the statistic

    beta = ln(mean(|x|)) - mean(ln(|x|))

depends only on the speech-to-noise power ratio, not on absolute scale.
beta is inverted through a precomputed table (see
scripts/generate_wada_beta_table.py for its provenance) spanning -20..+100 dB
in 1 dB steps, with linear interpolation between grid points and clamping at
the ends.

Energy profiles are per-frame RMS levels in dB relative to full scale, with
a -120 dB silence floor. Their pooled standard deviation is the
training-data variability signal consumed by voxgauge.dataset.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .audio_io import AudioClip
from .errors import ClipTooShort, DegenerateSignal

TABLE_ENV_VAR = "VOXGAUGE_TABLE_PATH"
MAG_FLOOR = 1e-10        # applied to magnitudes before the log
SILENCE_FLOOR_DB = -120.0  # 20*log10(1e-6)
_RMS_FLOOR = 1e-6
MIN_SNR_CLIP_SECONDS = 0.1

_table_cache: dict[str, tuple[np.ndarray, np.ndarray]] = {}


@dataclass(frozen=True)
class SnrEstimate:
    value_db: float
    method: str = "wada"
    clamped: bool = False


@dataclass(frozen=True)
class EnergyProfile:
    frame_db: np.ndarray
    mean_db: float
    std_db: float
    frame_ms: float
    hop_ms: float


def _default_table_path() -> str:
    override = os.environ.get(TABLE_ENV_VAR)
    if override:
        return override
    return str(resources.files("voxgauge").joinpath("data/wada_beta_table.txt"))


def load_beta_table(path: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Load the (snr_db, beta) lookup table; cached per path.

    Format: text, two whitespace-separated columns per row, beta strictly
    increasing with snr.
    """
    path = path or _default_table_path()
    cached = _table_cache.get(path)
    if cached is not None:
        return cached
    rows = np.loadtxt(path, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != 2 or rows.shape[0] < 2:
        raise ValueError(f"{path}: expected two columns of (snr_db, beta) rows")
    snr, beta = rows[:, 0], rows[:, 1]
    if not (np.all(np.diff(snr) > 0) and np.all(np.diff(beta) > 0)):
        raise ValueError(f"{path}: table must be strictly increasing")
    _table_cache[path] = (snr, beta)
    return snr, beta


def beta_statistic(samples: np.ndarray) -> float:
    """ln(mean(|x|)) - mean(ln(|x|)) over nonzero magnitudes, floored at 1e-10."""
    mag = np.abs(np.asarray(samples, dtype=np.float64))
    mag = mag[mag > 0.0]
    if mag.size == 0:
        raise DegenerateSignal("all samples are zero")
    mag = np.maximum(mag, MAG_FLOOR)
    return float(np.log(mag.mean()) - np.log(mag).mean())


def wada_snr(clip: AudioClip, table_path: str | None = None) -> SnrEstimate:
    """Blind SNR estimate for a clip of at least 0.1 s that is not all zeros.

    Scale-invariant: wada_snr(g*x) == wada_snr(x) for any gain g > 0.
    """
    if clip.duration_seconds < MIN_SNR_CLIP_SECONDS:
        raise DegenerateSignal(
            f"clip {clip.source_id or '<unnamed>'} shorter than "
            f"{MIN_SNR_CLIP_SECONDS} s"
        )
    beta = beta_statistic(clip.samples)  # raises DegenerateSignal on silence
    snr_grid, beta_grid = load_beta_table(table_path)
    value = float(np.interp(beta, beta_grid, snr_grid))
    clamped = bool(beta <= beta_grid[0] or beta >= beta_grid[-1])
    return SnrEstimate(value_db=value, clamped=clamped)


def energy_profile(clip: AudioClip, frame_ms: float = 25.0,
                   hop_ms: float = 10.0) -> EnergyProfile:
    """Per-frame RMS levels in dBFS with a -120 dB silence floor.

    Trailing samples that do not fill a frame are discarded; frame count is
    floor((N - frame_len) / hop_len) + 1. mean/std are the sample mean and
    sample (n-1) standard deviation of the frame levels.
    """
    if not 0 < hop_ms <= frame_ms:
        raise ValueError("hop_ms must satisfy 0 < hop_ms <= frame_ms")
    frame_len = int(round(clip.sample_rate * frame_ms / 1000.0))
    hop_len = int(round(clip.sample_rate * hop_ms / 1000.0))
    if frame_len < 1 or hop_len < 1:
        raise ValueError("frame and hop must span at least one sample")
    x = np.asarray(clip.samples, dtype=np.float64)
    if x.size < frame_len:
        raise ClipTooShort(
            f"clip {clip.source_id or '<unnamed>'}: {x.size} samples < "
            f"one {frame_ms} ms frame"
        )
    windows = np.lib.stride_tricks.sliding_window_view(x, frame_len)[::hop_len]
    rms = np.sqrt(np.mean(windows * windows, axis=1))
    frame_db = 20.0 * np.log10(np.maximum(rms, _RMS_FLOOR))
    std = float(frame_db.std(ddof=1)) if frame_db.size > 1 else 0.0
    return EnergyProfile(
        frame_db=frame_db,
        mean_db=float(frame_db.mean()),
        std_db=std,
        frame_ms=frame_ms,
        hop_ms=hop_ms,
    )
