"""Batch scoring over a manifest or a directory of WAVs.

Writes the score-file contract consumed by the main toolkit: a UTF-8 JSON
array with one record per clip, each carrying clip_id plus dnsmos_ovrl
and/or a unit-norm embedding. A clip that fails to decode or score becomes a
record with an `error` field; the run continues. The output file is written
atomically, and a sibling `<out>.meta.json` records which scorer backends
produced it.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .audio import read_wav
from .scorers import (
    DspMosProxy,
    ModelLoadError,
    OnnxEmbedder,
    OnnxMos,
    SpectralEmbedder,
)

VALID_SCORERS = ("mos", "embedding")
VALID_BACKENDS = ("auto", "dsp", "onnx")


@dataclass
class SidecarConfig:
    out: str
    manifest: str | None = None
    wav_dir: str | None = None
    scorers: tuple = ("mos", "embedding")
    backend: str = "auto"
    mos_model: str | None = None
    embedding_model: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if (self.manifest is None) == (self.wav_dir is None):
            raise ValueError("exactly one of manifest / wav_dir must be given")
        self.scorers = tuple(self.scorers)
        if not self.scorers:
            raise ValueError("at least one scorer must be enabled")
        for s in self.scorers:
            if s not in VALID_SCORERS:
                raise ValueError(f"unknown scorer {s!r}, expected {VALID_SCORERS}")
        if self.backend not in VALID_BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")


def resolve_clips(config: SidecarConfig) -> list[tuple[str, str]]:
    """(clip_id, absolute audio path) pairs, in deterministic order."""
    if config.wav_dir is not None:
        root = os.path.abspath(config.wav_dir)
        names = sorted(n for n in os.listdir(root) if n.lower().endswith(".wav"))
        if not names:
            raise ValueError(f"{config.wav_dir}: no .wav files")
        return [(os.path.splitext(n)[0], os.path.join(root, n)) for n in names]

    base = os.path.dirname(os.path.abspath(config.manifest))
    clips = []
    seen = set()
    with open(config.manifest, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            clip_id = obj.get("clip_id")
            path = obj.get("audio_path")
            if not isinstance(clip_id, str) or not isinstance(path, str):
                raise ValueError(f"{config.manifest}:{lineno}: "
                                 "clip_id/audio_path missing")
            if clip_id in seen:
                raise ValueError(f"{config.manifest}:{lineno}: duplicate "
                                 f"clip_id {clip_id!r}")
            seen.add(clip_id)
            if not os.path.isabs(path):
                path = os.path.join(base, path)
            clips.append((clip_id, path))
    if not clips:
        raise ValueError(f"{config.manifest}: empty manifest")
    return clips


def build_scorers(config: SidecarConfig):
    """Instantiate (mos_scorer, embedder) per the backend policy."""
    want_mos = "mos" in config.scorers
    want_emb = "embedding" in config.scorers

    def onnx_pair():
        mos = OnnxMos(config.mos_model) if want_mos else None
        emb = OnnxEmbedder(config.embedding_model) if want_emb else None
        return mos, emb

    def dsp_pair():
        return (DspMosProxy() if want_mos else None,
                SpectralEmbedder() if want_emb else None)

    if config.backend == "dsp":
        return dsp_pair()
    if config.backend == "onnx":
        if want_mos and not config.mos_model:
            raise ModelLoadError("onnx backend needs --mos-model")
        if want_emb and not config.embedding_model:
            raise ModelLoadError("onnx backend needs --embedding-model")
        return onnx_pair()
    # auto: pretrained models when both runtime and checkpoints are present
    have_models = ((not want_mos or config.mos_model)
                   and (not want_emb or config.embedding_model))
    if have_models:
        try:
            return onnx_pair()
        except ModelLoadError:
            pass
    return dsp_pair()


def _score_one(clip_id, path, mos_scorer, embedder):
    try:
        samples, rate = read_wav(path)
        record = {"clip_id": clip_id}
        if mos_scorer is not None:
            record["dnsmos_ovrl"] = mos_scorer.score(samples, rate)
        if embedder is not None:
            record["embedding"] = [float(v) for v in embedder.embed(samples, rate)]
        return record
    except Exception as exc:
        return {"clip_id": clip_id, "error": f"{type(exc).__name__}: {exc}"}


def score_clips(config: SidecarConfig) -> str:
    """Score every clip and write the score file. Returns the output path."""
    clips = resolve_clips(config)
    mos_scorer, embedder = build_scorers(config)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(
                lambda c: _score_one(c[0], c[1], mos_scorer, embedder), clips))
    else:
        records = [_score_one(cid, path, mos_scorer, embedder)
                   for cid, path in clips]

    tmp = config.out + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(records, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, config.out)

    meta = {
        "clips": len(records),
        "errors": sum(1 for r in records if "error" in r),
        "model_ids": {
            name: scorer.model_id
            for name, scorer in (("mos", mos_scorer), ("embedding", embedder))
            if scorer is not None
        },
    }
    with open(config.out + ".meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")
    return config.out
