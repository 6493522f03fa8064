"""Sidecar command line: score clips into a voxgauge score file."""

import argparse
import sys

from .scorers import ModelLoadError
from .sidecar import VALID_BACKENDS, SidecarConfig, score_clips


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="score",
        description="batch MOS / speaker-embedding scoring into a JSON score file")
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", help="JSONL manifest with clip_id + audio_path")
    src.add_argument("--wav-dir", help="directory of .wav files (clip_id = stem)")
    ap.add_argument("--out", required=True, help="score file to write")
    ap.add_argument("--scorers", default="mos,embedding",
                    help="comma list from {mos, embedding}")
    ap.add_argument("--backend", choices=VALID_BACKENDS, default="auto",
                    help="auto: pretrained models when available, else the "
                         "deterministic dsp baseline")
    ap.add_argument("--mos-model", help="path to a fetched MOS .onnx model")
    ap.add_argument("--embedding-model", help="path to a fetched embedding .onnx model")
    ap.add_argument("--jobs", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = SidecarConfig(
            out=args.out,
            manifest=args.manifest,
            wav_dir=args.wav_dir,
            scorers=tuple(s.strip() for s in args.scorers.split(",") if s.strip()),
            backend=args.backend,
            mos_model=args.mos_model,
            embedding_model=args.embedding_model,
            jobs=args.jobs,
        )
        out = score_clips(config)
    except (ValueError, ModelLoadError, OSError) as exc:
        print(f"score: error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
