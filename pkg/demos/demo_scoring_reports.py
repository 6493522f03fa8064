#!/usr/bin/env python3
"""Score aggregation and condition comparison reports.

Loads per-clip score records for three conditions of one speaker (reference
audio, base model, adapted model), aggregates them, and renders the
comparison in every output format. Embeddings demonstrate the 0-1 cosine
similarity scale against a reference voice print.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from voxgauge import (
    ConditionAggregates,
    aggregate,
    comparison_report,
    load_scores,
    render,
    similarity_01,
)

RNG = np.random.default_rng(11)
REFERENCE_VOICE = RNG.standard_normal(64)


def fake_scores(path, mos_center, snr_center, voice_shift):
    records = []
    for i in range(5):
        emb = REFERENCE_VOICE + voice_shift * RNG.standard_normal(64)
        records.append({
            "clip_id": f"gen_{path.stem}_{i}",
            "dnsmos_ovrl": round(float(np.clip(mos_center + 0.05 * RNG.standard_normal(), 1, 5)), 3),
            "snr_db": round(snr_center + RNG.standard_normal(), 2),
            "embedding": [round(float(v), 6) for v in emb],
        })
    path.write_text(json.dumps(records), encoding="utf-8")
    return path


def main():
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        files = {
            "ref": fake_scores(root / "ref.json", 4.15, 27.0, 0.0),
            "base": fake_scores(root / "base.json", 3.72, 31.6, 1.2),
            "adapted": fake_scores(root / "adapted.json", 4.14, 39.6, 0.6),
        }

        conditions = []
        for label, path in files.items():
            scores = load_scores(path)
            agg = aggregate(scores, reference_embedding=REFERENCE_VOICE)
            conditions.append(ConditionAggregates(label=label, metrics=agg))
            print(f"{label}: n={agg.n} mos={agg.mos_mean:.3f} "
                  f"snr={agg.snr_mean_db:.2f} similarity={agg.similarity_mean:.3f}")

        a, b = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
        print(f"\nsimilarity scale: same voice {similarity_01(a, a):.2f}, "
              f"orthogonal {similarity_01(a, b):.2f}, "
              f"opposite {similarity_01(a, -a):.2f}\n")

        report = comparison_report("demo-speaker", conditions)
        for fmt in ("table-text", "csv", "json"):
            print(f"--- {fmt} ---")
            print(render(report, fmt))


if __name__ == "__main__":
    main()
