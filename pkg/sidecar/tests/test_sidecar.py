"""Sidecar tests, including the cross-component contract: score files must be
accepted by the main toolkit's loader, MOS values must sit in [1, 5], repeat
runs must agree within 0.001, and self-similarity through the main package's
similarity function must be 1.0.

The contract tests run against the deterministic dsp backend, which is what
the sidecar uses when pretrained checkpoints are not fetched.
"""

import json
import math
from pathlib import Path

import pytest

from voxgauge_scorers import (
    ModelLoadError,
    SidecarConfig,
    build_scorers,
    score_clips,
)
from voxgauge_scorers.cli import main as cli_main

# external-interface validation on the consumer side
from voxgauge.scores import load_scores, similarity_01

DATA_DIR = Path(__file__).parent / "data"
BUNDLED = ("quiet_noise", "speechlike", "tonal")


@pytest.fixture
def scored(tmp_path):
    out = tmp_path / "scores.json"
    score_clips(SidecarConfig(out=str(out), wav_dir=str(DATA_DIR), backend="dsp"))
    return out


class TestBundledClips:
    def test_one_record_per_clip(self, scored):
        records = json.loads(scored.read_text(encoding="utf-8"))
        assert [r["clip_id"] for r in records] == list(BUNDLED)

    def test_accepted_by_primary_loader(self, scored):
        scores = load_scores(scored)
        assert len(scores) == 3
        assert scores.embedding_dim == 48

    def test_mos_in_range(self, scored):
        for record in load_scores(scored):
            assert 1.0 <= record.dnsmos_ovrl <= 5.0

    def test_repeat_run_determinism(self, scored, tmp_path):
        again = tmp_path / "again.json"
        score_clips(SidecarConfig(out=str(again), wav_dir=str(DATA_DIR),
                                  backend="dsp"))
        first = load_scores(scored)
        second = load_scores(again)
        for clip_id in BUNDLED:
            a, b = first.get(clip_id), second.get(clip_id)
            assert abs(a.dnsmos_ovrl - b.dnsmos_ovrl) <= 0.001
            assert a.embedding.tolist() == b.embedding.tolist()

    def test_self_similarity_is_one(self, scored):
        for record in load_scores(scored):
            sim = similarity_01(record.embedding, record.embedding)
            assert abs(sim - 1.0) <= 1e-6

    def test_embeddings_unit_norm(self, scored):
        for record in load_scores(scored):
            norm = math.sqrt(sum(v * v for v in record.embedding))
            assert abs(norm - 1.0) <= 1e-6

    def test_distinct_clips_are_distinguishable(self, scored):
        scores = load_scores(scored)
        sim = similarity_01(scores.get("speechlike").embedding,
                            scores.get("tonal").embedding)
        assert sim < 0.999

    def test_speechlike_scores_above_noise(self, scored):
        scores = load_scores(scored)
        assert (scores.get("speechlike").dnsmos_ovrl
                > scores.get("quiet_noise").dnsmos_ovrl)

    def test_meta_records_model_ids(self, scored):
        meta = json.loads((Path(str(scored) + ".meta.json"))
                          .read_text(encoding="utf-8"))
        assert meta["clips"] == 3 and meta["errors"] == 0
        assert meta["model_ids"] == {"mos": "dsp-mos-proxy-v1",
                                     "embedding": "spectral-stats-v1"}


class TestManifestMode:
    def test_relative_paths_resolve_against_manifest(self, tmp_path):
        import os
        manifest = tmp_path / "m.jsonl"
        lines = [{"clip_id": f"clip_{name}",
                  "audio_path": os.path.relpath(DATA_DIR / f"{name}.wav", tmp_path),
                  "transcript": "x", "speaker_id": "s"} for name in BUNDLED]
        manifest.write_text("\n".join(json.dumps(l) for l in lines) + "\n",
                            encoding="utf-8")
        out = tmp_path / "scores.json"
        score_clips(SidecarConfig(out=str(out), manifest=str(manifest),
                                  backend="dsp", scorers=("mos",)))
        scores = load_scores(out)
        assert len(scores) == 3
        assert scores.get("clip_speechlike").embedding is None

    def test_failed_clip_becomes_error_record(self, tmp_path):
        bad = tmp_path / "broken.wav"
        bad.write_bytes(b"RIFFnope")
        manifest = tmp_path / "m.jsonl"
        lines = [
            {"clip_id": "ok", "audio_path": str(DATA_DIR / "tonal.wav")},
            {"clip_id": "broken", "audio_path": str(bad)},
        ]
        manifest.write_text("\n".join(json.dumps(l) for l in lines) + "\n",
                            encoding="utf-8")
        out = tmp_path / "scores.json"
        score_clips(SidecarConfig(out=str(out), manifest=str(manifest),
                                  backend="dsp"))
        scores = load_scores(out)  # error records still satisfy the contract
        assert scores.get("broken").error
        assert scores.get("broken").dnsmos_ovrl is None
        assert 1.0 <= scores.get("ok").dnsmos_ovrl <= 5.0

    def test_duplicate_clip_ids_rejected(self, tmp_path):
        manifest = tmp_path / "m.jsonl"
        line = json.dumps({"clip_id": "a", "audio_path": str(DATA_DIR / "tonal.wav")})
        manifest.write_text(line + "\n" + line + "\n", encoding="utf-8")
        with pytest.raises(ValueError):
            score_clips(SidecarConfig(out=str(tmp_path / "s.json"),
                                      manifest=str(manifest), backend="dsp"))


class TestConfig:
    def test_needs_exactly_one_input(self, tmp_path):
        with pytest.raises(ValueError):
            SidecarConfig(out="s.json")
        with pytest.raises(ValueError):
            SidecarConfig(out="s.json", manifest="m.jsonl", wav_dir="d")

    def test_needs_at_least_one_scorer(self):
        with pytest.raises(ValueError):
            SidecarConfig(out="s.json", wav_dir="d", scorers=())

    def test_unknown_scorer(self):
        with pytest.raises(ValueError):
            SidecarConfig(out="s.json", wav_dir="d", scorers=("pitch",))

    def test_onnx_backend_without_runtime_fails_loudly(self, tmp_path):
        fake = tmp_path / "model.onnx"
        fake.write_bytes(b"\x00")
        config = SidecarConfig(out="s.json", wav_dir=str(DATA_DIR),
                               backend="onnx", mos_model=str(fake),
                               embedding_model=str(fake))
        with pytest.raises(ModelLoadError):
            build_scorers(config)

    def test_auto_falls_back_to_dsp(self):
        config = SidecarConfig(out="s.json", wav_dir=str(DATA_DIR), backend="auto")
        mos_scorer, embedder = build_scorers(config)
        assert mos_scorer.model_id == "dsp-mos-proxy-v1"
        assert embedder.model_id == "spectral-stats-v1"

    def test_jobs_parallel_same_output(self, tmp_path):
        seq = tmp_path / "seq.json"
        par = tmp_path / "par.json"
        score_clips(SidecarConfig(out=str(seq), wav_dir=str(DATA_DIR), backend="dsp"))
        score_clips(SidecarConfig(out=str(par), wav_dir=str(DATA_DIR),
                                  backend="dsp", jobs=3))
        assert seq.read_bytes() == par.read_bytes()


class TestCli:
    def test_end_to_end(self, tmp_path, capsys):
        out = tmp_path / "scores.json"
        code = cli_main(["--wav-dir", str(DATA_DIR), "--out", str(out),
                         "--scorers", "mos,embedding", "--backend", "dsp"])
        assert code == 0
        assert len(load_scores(out)) == 3

    def test_bad_dir_is_error(self, tmp_path, capsys):
        code = cli_main(["--wav-dir", str(tmp_path / "empty"), "--out",
                         str(tmp_path / "s.json")])
        assert code == 1
