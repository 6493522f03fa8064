#!/usr/bin/env python3
"""From a training manifest to a fine-tuning forecast and a data mix.

Synthesizes a small corpus of three speakers whose recordings differ only in
how much their loudness varies clip to clip, then walks the curation path:
per-speaker statistics, the energy-variability forecast, the recommended
decoding parameters, and a mixed-data manifest that takes a fixed amount of
audio from each speaker.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from voxgauge import (
    MixTarget,
    build_mix_manifest,
    classify_variability,
    load_manifest,
    recommend_decoding,
    speaker_stats,
    write_manifest,
)
from voxgauge.audio_io import AudioClip, save_wav_float32

SPEAKERS = {
    "varied": (-10.0, -38.0),   # loud/quiet alternation: high energy spread
    "middling": (-18.0, -40.0),
    "steady": (-24.0, -24.0),   # one microphone, one room, one level
}


def build_corpus(root: Path) -> str:
    rng = np.random.default_rng(7)
    lines = []
    for speaker, levels in SPEAKERS.items():
        for i in range(6):
            amp = 10 ** (levels[i % 2] / 20) * np.sqrt(3)
            clip = AudioClip(samples=rng.uniform(-amp, amp, 12000).astype(np.float32),
                             sample_rate=16000)
            wav = root / f"{speaker}_{i}.wav"
            save_wav_float32(clip, wav)
            lines.append({"clip_id": f"{speaker}_{i}", "audio_path": wav.name,
                          "transcript": f"utterance {i} spoken by {speaker}",
                          "speaker_id": speaker})
    manifest = root / "corpus.jsonl"
    manifest.write_text("\n".join(json.dumps(l) for l in lines) + "\n",
                        encoding="utf-8")
    return str(manifest)


def main():
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        manifest = load_manifest(build_corpus(root))

        for speaker in manifest.speakers():
            stats = speaker_stats(manifest, speaker)
            forecast = classify_variability(stats)
            params = recommend_decoding(forecast)
            print(f"speaker {speaker!r}")
            print(f"  clips {stats.n_clips}, {stats.total_hours * 3600:.1f} s total, "
                  f"{stats.unique_words} unique words")
            print(f"  energy {stats.energy_mean_db:.1f} dB mean, "
                  f"{stats.energy_std_db:.1f} dB spread")
            print(f"  forecast: {forecast.category.value}")
            print(f"  decoding: temperature {params.temperature}, top_k {params.top_k}")
            if params.advisory:
                print(f"  advisory: {params.advisory}")
            print()

        mix = build_mix_manifest(manifest, [
            MixTarget("varied", hours=2.0 / 3600),
            MixTarget("middling", hours=2.0 / 3600),
            MixTarget("steady", fraction=0.5),
        ])
        out = root / "mix.jsonl"
        write_manifest(mix, out)
        print(f"mixed manifest: {len(mix)} clips "
              f"({[e.clip_id for e in mix]})")


if __name__ == "__main__":
    main()
