"""Manifest ingestion, per-speaker statistics, variability forecasting and
mixed-data manifest construction.

A manifest is line-delimited JSON: one object per line with clip_id,
audio_path, transcript, speaker_id. Durations are filled from WAV headers on
load (no full decode); relative audio paths resolve against the manifest's
directory.

The adaptation forecast rests on one empirical signal: the standard
deviation of pooled frame energies of a speaker's training audio. High
spread (>= 13 dB) predicts positive fine-tuning outcomes, low spread
(<= 10 dB) predicts perceptual collapse, and the band between is uncertain.
"""

from __future__ import annotations

import json
import math
import os
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .audio_io import load_wav, read_wav_info
from .errors import (
    ClipTooShort,
    DuplicateClipId,
    EmptyResult,
    MissingAudio,
    SchemaError,
    UnknownSpeaker,
)
from .scores import ScoreSet
from .signal_metrics import energy_profile

POSITIVE_STD_DB = 13.0
COLLAPSE_STD_DB = 10.0


@dataclass
class ManifestEntry:
    clip_id: str
    audio_path: str
    transcript: str
    speaker_id: str
    duration_s: float | None = None


@dataclass
class Manifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.clip_id in seen:
                raise DuplicateClipId(e.clip_id)
            seen.add(e.clip_id)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def speakers(self) -> list[str]:
        out = []
        for e in self.entries:
            if e.speaker_id not in out:
                out.append(e.speaker_id)
        return out

    def for_speaker(self, speaker_id: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.speaker_id == speaker_id]


_REQUIRED_FIELDS = ("clip_id", "audio_path", "transcript", "speaker_id")


def load_manifest(path, fill_durations: bool = True) -> Manifest:
    """Parse and validate a JSONL manifest, filling durations from headers."""
    path = os.fspath(path)
    base_dir = os.path.dirname(os.path.abspath(path))
    entries = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {lineno}", "json",
                                  f"line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise SchemaError(f"line {lineno}", "record")
            for name in _REQUIRED_FIELDS:
                if not isinstance(obj.get(name), str) or not obj[name]:
                    raise SchemaError(f"line {lineno}", name)
            if obj["clip_id"] in seen:
                raise DuplicateClipId(obj["clip_id"])
            seen.add(obj["clip_id"])
            entries.append(ManifestEntry(
                clip_id=obj["clip_id"],
                audio_path=obj["audio_path"],
                transcript=obj["transcript"],
                speaker_id=obj["speaker_id"],
            ))

    if fill_durations:
        for e in entries:
            resolved = e.audio_path
            if not os.path.isabs(resolved):
                resolved = os.path.join(base_dir, resolved)
            if not os.path.isfile(resolved):
                raise MissingAudio(e.audio_path)
            e.audio_path = resolved
            e.duration_s = read_wav_info(resolved).duration_seconds
    return Manifest(entries)


def write_manifest(manifest: Manifest, path) -> None:
    """Write JSONL with a fixed key order so output bytes are reproducible."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in manifest:
            obj = {"clip_id": e.clip_id, "audio_path": e.audio_path,
                   "transcript": e.transcript, "speaker_id": e.speaker_id}
            if e.duration_s is not None:
                obj["duration_s"] = e.duration_s
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def tokenize_transcript(text: str) -> list[str]:
    """Lowercase, strip Unicode punctuation, split on whitespace."""
    lowered = text.lower()
    cleaned = "".join(
        c for c in lowered if not unicodedata.category(c).startswith("P"))
    return cleaned.split()


@dataclass(frozen=True)
class SpeakerDatasetStats:
    speaker_id: str
    n_clips: int
    total_hours: float
    clip_len_mean_s: float
    clip_len_std_s: float
    unique_words: int
    avg_words_per_clip: float
    energy_mean_db: float
    energy_std_db: float
    mos_mean: float | None = None
    mos_std: float | None = None


class VariabilityClass(Enum):
    POSITIVE_EXPECTED = "PositiveExpected"
    UNCERTAIN = "Uncertain"
    COLLAPSE_RISK = "CollapseRisk"


@dataclass(frozen=True)
class AdaptationForecast:
    category: VariabilityClass
    energy_std_db: float
    rationale: str


@dataclass(frozen=True)
class DecodingParams:
    temperature: float
    top_k: int
    advisory: str | None = None


def _sample_std(values) -> float:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.std(ddof=1)) if arr.size > 1 else 0.0


def speaker_stats(manifest: Manifest, speaker_id: str,
                  scores: ScoreSet | None = None,
                  frame_ms: float = 25.0, hop_ms: float = 10.0,
                  jobs: int = 1) -> SpeakerDatasetStats:
    """Duration, vocabulary, pooled frame-energy and optional MOS statistics.

    Energy statistics pool every analysis frame of every clip the speaker
    has; clips shorter than one frame contribute no frames. Standard
    deviations are sample (n-1) everywhere. MOS fields are filled only when
    a score set is supplied and carries dnsmos values for this speaker.
    """
    entries = manifest.for_speaker(speaker_id)
    if not entries:
        raise UnknownSpeaker(speaker_id)
    for e in entries:
        if e.duration_s is None:
            raise ValueError(f"clip {e.clip_id}: duration not populated")

    durations = [e.duration_s for e in entries]
    tokens_per_clip = [tokenize_transcript(e.transcript) for e in entries]
    vocabulary = set()
    total_tokens = 0
    for tokens in tokens_per_clip:
        vocabulary.update(tokens)
        total_tokens += len(tokens)

    def clip_frames(entry: ManifestEntry) -> np.ndarray:
        clip = load_wav(entry.audio_path, source_id=entry.clip_id)
        try:
            return energy_profile(clip, frame_ms=frame_ms, hop_ms=hop_ms).frame_db
        except ClipTooShort:
            return np.empty(0)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            frame_arrays = list(pool.map(clip_frames, entries))
    else:
        frame_arrays = [clip_frames(e) for e in entries]
    pooled = np.concatenate(frame_arrays) if frame_arrays else np.empty(0)
    if pooled.size == 0:
        raise ClipTooShort(
            f"speaker {speaker_id}: no clip spans one {frame_ms} ms frame")

    mos_mean = mos_std = None
    if scores is not None:
        mos_vals = []
        for e in entries:
            rec = scores.get(e.clip_id)
            if rec is not None and rec.dnsmos_ovrl is not None:
                mos_vals.append(rec.dnsmos_ovrl)
        if mos_vals:
            mos_mean = float(np.mean(mos_vals))
            mos_std = _sample_std(mos_vals)

    return SpeakerDatasetStats(
        speaker_id=speaker_id,
        n_clips=len(entries),
        total_hours=sum(durations) / 3600.0,
        clip_len_mean_s=float(np.mean(durations)),
        clip_len_std_s=_sample_std(durations),
        unique_words=len(vocabulary),
        avg_words_per_clip=total_tokens / len(entries),
        energy_mean_db=float(pooled.mean()),
        energy_std_db=float(pooled.std(ddof=1)) if pooled.size > 1 else 0.0,
        mos_mean=mos_mean,
        mos_std=mos_std,
    )


def variability_class(energy_std_db: float) -> VariabilityClass:
    if energy_std_db >= POSITIVE_STD_DB:
        return VariabilityClass.POSITIVE_EXPECTED
    if energy_std_db <= COLLAPSE_STD_DB:
        return VariabilityClass.COLLAPSE_RISK
    return VariabilityClass.UNCERTAIN


def forecast_for_std(energy_std_db: float) -> AdaptationForecast:
    cls = variability_class(energy_std_db)
    if cls is VariabilityClass.POSITIVE_EXPECTED:
        rationale = (f"energy std {energy_std_db:.2f} dB >= {POSITIVE_STD_DB} dB: "
                     "training data is acoustically diverse; fine-tuning is "
                     "expected to improve perceptual quality")
    elif cls is VariabilityClass.COLLAPSE_RISK:
        rationale = (f"energy std {energy_std_db:.2f} dB <= {COLLAPSE_STD_DB} dB: "
                     "training data is acoustically homogeneous; fine-tuning "
                     "risks perceptual collapse")
    else:
        rationale = (f"energy std {energy_std_db:.2f} dB lies between "
                     f"{COLLAPSE_STD_DB} and {POSITIVE_STD_DB} dB: outcome "
                     "uncertain, evaluate perceptually")
    return AdaptationForecast(category=cls, energy_std_db=energy_std_db,
                              rationale=rationale)


def classify_variability(stats: SpeakerDatasetStats) -> AdaptationForecast:
    """Step function of the pooled energy std; thresholds 13 / 10 dB."""
    return forecast_for_std(stats.energy_std_db)


def recommend_decoding(forecast: AdaptationForecast) -> DecodingParams:
    """Constrained sampling for collapse-risk speakers, defaults otherwise."""
    if forecast.category is VariabilityClass.COLLAPSE_RISK:
        return DecodingParams(temperature=0.8, top_k=40)
    if forecast.category is VariabilityClass.UNCERTAIN:
        return DecodingParams(
            temperature=1.0, top_k=50,
            advisory=("outcome uncertain: A/B the defaults against "
                      "constrained decoding (temperature 0.8, top_k 40) "
                      "and pick by perceptual scores"),
        )
    return DecodingParams(temperature=1.0, top_k=50)


@dataclass(frozen=True)
class MixTarget:
    """Take either a duration or a fraction of one speaker's clips."""

    speaker_id: str
    hours: float | None = None
    fraction: float | None = None

    def __post_init__(self):
        if (self.hours is None) == (self.fraction is None):
            raise ValueError("exactly one of hours/fraction must be set")
        if self.hours is not None and self.hours <= 0:
            raise ValueError("hours target must be positive")
        if self.fraction is not None and not 0 < self.fraction <= 1.0:
            raise ValueError("fraction target must be in (0, 1]")


def build_mix_manifest(manifests, targets) -> Manifest:
    """Deterministic first-fit selection in manifest order, per target.

    Hours targets take clips until the cumulative duration first reaches the
    target (all clips if the speaker has less). Fraction targets take the
    first ceil(fraction * clip_count) clips. Output keeps per-speaker order,
    with speakers concatenated in target order.
    """
    if isinstance(manifests, Manifest):
        manifests = [manifests]
    combined: list[ManifestEntry] = []
    for m in manifests:
        combined.extend(m.entries)
    seen = set()
    for e in combined:
        if e.clip_id in seen:
            raise DuplicateClipId(e.clip_id)
        seen.add(e.clip_id)

    by_speaker: dict[str, list[ManifestEntry]] = {}
    for e in combined:
        by_speaker.setdefault(e.speaker_id, []).append(e)

    out: list[ManifestEntry] = []
    for target in targets:
        pool = by_speaker.get(target.speaker_id)
        if not pool:
            raise UnknownSpeaker(target.speaker_id)
        if target.fraction is not None:
            take = math.ceil(target.fraction * len(pool))
            out.extend(replace(e) for e in pool[:take])
        else:
            budget = target.hours * 3600.0
            cumulative = 0.0
            for e in pool:
                if e.duration_s is None:
                    raise ValueError(f"clip {e.clip_id}: duration not populated")
                out.append(replace(e))
                cumulative += e.duration_s
                if cumulative >= budget:
                    break
    if not out:
        raise EmptyResult("mix selected no clips")
    return Manifest(out)
