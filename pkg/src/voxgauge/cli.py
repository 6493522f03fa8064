"""Command-line front end. Every subcommand is a thin shell over one library
call; identical inputs give identical outputs to the library API.

Machine-readable JSON is the default output; pass --format table-text for
humans or csv where tabular. Exit status: 0 success, 1 domain error (the
message names the failing clip, line or record), 2 usage error. The env var
VOXGAUGE_TABLE_PATH overrides the packaged SNR lookup table.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import checkpoints, dataset, latency, reporting, scores, signal_metrics
from .audio_io import load_wav
from .errors import VoxgaugeError

FORMATS = ("json", "csv", "table-text")


def _emit(data, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(data, indent=2) + "\n")
        return
    rows = data if isinstance(data, list) else [data]
    flat_rows = [_flatten(r) for r in rows]
    keys = []
    for r in flat_rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    if fmt == "csv":
        out.write(",".join(keys) + "\n")
        for r in flat_rows:
            out.write(",".join(_cell(r.get(k)) for k in keys) + "\n")
    else:  # table-text
        width = max(len(k) for k in keys) + 2
        for i, r in enumerate(flat_rows):
            if i:
                out.write("\n")
            for k in keys:
                if k in r:
                    out.write(f"{k.ljust(width)}{_cell(r[k])}\n")


def _flatten(obj, prefix: str = "") -> dict:
    flat = {}
    for k, v in obj.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, prefix=f"{key}."))
        else:
            flat[key] = v
    return flat


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        s = f"{v:.3f}"
        return "0.000" if s == "-0.000" else s
    if isinstance(v, list):
        return ";".join(_cell(x) for x in v)
    return str(v)


def _weights(text: str):
    try:
        parts = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad weights {text!r}, expected w1,w2,w3")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected exactly three weights w1,w2,w3")
    return parts


def _take(text: str) -> dataset.MixTarget:
    try:
        speaker, spec = text.split("=", 1)
        if spec.endswith("h"):
            return dataset.MixTarget(speaker_id=speaker, hours=float(spec[:-1]))
        if spec.endswith("f"):
            return dataset.MixTarget(speaker_id=speaker, fraction=float(spec[:-1]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad take spec {text!r}: {exc}") from None
    raise argparse.ArgumentTypeError(
        f"bad take spec {text!r}, expected SPEAKER=<hours>h or SPEAKER=<fraction>f")


def _condition(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(
            f"bad condition {text!r}, expected LABEL=scores.json")
    label, path = text.split("=", 1)
    return label, path


def _stats_dict(st: dataset.SpeakerDatasetStats) -> dict:
    out = {
        "speaker_id": st.speaker_id,
        "n_clips": st.n_clips,
        "total_hours": st.total_hours,
        "clip_len_mean_s": st.clip_len_mean_s,
        "clip_len_std_s": st.clip_len_std_s,
        "unique_words": st.unique_words,
        "avg_words_per_clip": st.avg_words_per_clip,
        "energy_mean_db": st.energy_mean_db,
        "energy_std_db": st.energy_std_db,
    }
    if st.mos_mean is not None:
        out["mos_mean"] = st.mos_mean
        out["mos_std"] = st.mos_std
    return out


def _forecast_dict(fc: dataset.AdaptationForecast) -> dict:
    return {"class": fc.category.value, "energy_std_db": fc.energy_std_db,
            "rationale": fc.rationale}


def _decoding_dict(params: dataset.DecodingParams) -> dict:
    out = {"temperature": params.temperature, "top_k": params.top_k}
    if params.advisory is not None:
        out["advisory"] = params.advisory
    return out


def _cmd_snr(args, out) -> int:
    results = []
    for path in args.wav:
        est = signal_metrics.wada_snr(load_wav(path))
        results.append({"clip": path, "snr_db": est.value_db,
                        "method": est.method, "clamped": est.clamped})
    _emit(results[0] if len(results) == 1 else results, args.format, out)
    return 0


def _cmd_energy(args, out) -> int:
    results = []
    for path in args.wav:
        prof = signal_metrics.energy_profile(load_wav(path),
                                             frame_ms=args.frame_ms,
                                             hop_ms=args.hop_ms)
        results.append({"clip": path, "frames": int(prof.frame_db.size),
                        "mean_db": prof.mean_db, "std_db": prof.std_db})
    _emit(results[0] if len(results) == 1 else results, args.format, out)
    return 0


def _analyze_one(manifest, speaker, score_set, args) -> dict:
    stats = dataset.speaker_stats(manifest, speaker, scores=score_set,
                                  frame_ms=args.frame_ms, hop_ms=args.hop_ms,
                                  jobs=args.jobs)
    forecast = dataset.classify_variability(stats)
    params = dataset.recommend_decoding(forecast)
    return {"speaker_id": speaker, "stats": _stats_dict(stats),
            "forecast": _forecast_dict(forecast),
            "decoding": _decoding_dict(params)}


def _cmd_analyze(args, out) -> int:
    manifest = dataset.load_manifest(args.manifest)
    score_set = scores.load_scores(args.scores) if args.scores else None
    if args.speaker:
        result = _analyze_one(manifest, args.speaker, score_set, args)
    else:
        result = [_analyze_one(manifest, s, score_set, args)
                  for s in manifest.speakers()]
    _emit(result, args.format, out)
    return 0


def _cmd_eval(args, out) -> int:
    reference = None
    if args.reference_embedding:
        with open(args.reference_embedding, encoding="utf-8") as fh:
            reference = json.load(fh)
    if args.condition:
        conds = []
        for label, path in args.condition:
            agg = scores.aggregate(scores.load_scores(path),
                                   reference_embedding=reference)
            conds.append(reporting.ConditionAggregates(label=label, metrics=agg))
        report = reporting.comparison_report(args.speaker or "-", conds)
        out.write(reporting.render(report, args.format))
        return 0
    agg = scores.aggregate(scores.load_scores(args.scores),
                           reference_embedding=reference)
    result = {"n": agg.n}
    for name in ("mos_mean", "mos_std", "snr_mean_db", "similarity_mean"):
        v = getattr(agg, name)
        if v is not None:
            result[name] = v
    _emit(result, args.format, out)
    return 0


def _cmd_select(args, out) -> int:
    points, meta = checkpoints.load_checkpoint_series(args.series)
    ranking = checkpoints.rank_checkpoints(points, weights=args.weights)
    result = {"ranking": ranking, "best_step": ranking[0]}
    try:
        finding = checkpoints.detect_divergence(
            points, mos_drop_threshold=args.mos_drop_threshold)
        result["divergence"] = {
            "diverged": finding.diverged,
            "window": list(finding.window) if finding.window else None,
            "mos_drop": finding.mos_drop,
            "loss_drop": finding.loss_drop,
        }
    except VoxgaugeError:
        result["divergence"] = None  # series carries no usable loss/mos pairs
    if meta is not None:
        result["run_meta"] = {"adapter_rank": meta.adapter_rank,
                              "adapter_alpha": meta.adapter_alpha,
                              "batch_size": meta.batch_size,
                              "epochs": meta.epochs}
    _emit(result, args.format, out)
    return 0


def _cmd_mix(args, out) -> int:
    manifests = [dataset.load_manifest(p) for p in args.manifest]
    mixed = dataset.build_mix_manifest(manifests, args.take)
    if args.out:
        dataset.write_manifest(mixed, args.out)
    else:
        for e in mixed:
            obj = {"clip_id": e.clip_id, "audio_path": e.audio_path,
                   "transcript": e.transcript, "speaker_id": e.speaker_id,
                   "duration_s": e.duration_s}
            out.write(json.dumps(obj, ensure_ascii=False) + "\n")
    return 0


def _cmd_bench(args, out) -> int:
    if args.replay:
        report = latency.replay_bench(args.replay)
    else:
        report = latency.run_bench(args.engine, args.text, args.runs,
                                   timeout_s=args.timeout_s,
                                   include_warmup=args.include_warmup)
    _emit({
        "runs": report.runs,
        "first_chunk_latency_s": {"mean": report.first_chunk_latency_s.mean,
                                  "std": report.first_chunk_latency_s.std},
        "per_chunk_rtf": report.per_chunk_rtf,
        "total_time_s": report.total_time_s,
        "total_audio_s": report.total_audio_s,
    }, args.format, out)
    return 0


def _cmd_report(args, out) -> int:
    with open(args.report, encoding="utf-8") as fh:
        report = reporting.report_from_json(fh.read())
    out.write(reporting.render(report, args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="voxgauge",
        description="speech-quality metrics, dataset forecasting, checkpoint "
                    "selection and streaming latency benchmarks")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=FORMATS, default="json")

    p = sub.add_parser("snr", help="blind SNR of WAV clips")
    p.add_argument("wav", nargs="+")
    add_format(p)
    p.set_defaults(func=_cmd_snr)

    p = sub.add_parser("energy", help="frame-energy statistics of WAV clips")
    p.add_argument("wav", nargs="+")
    p.add_argument("--frame-ms", type=float, default=25.0)
    p.add_argument("--hop-ms", type=float, default=10.0)
    add_format(p)
    p.set_defaults(func=_cmd_energy)

    p = sub.add_parser("analyze",
                       help="dataset statistics, variability forecast and "
                            "decoding recommendation")
    p.add_argument("manifest")
    p.add_argument("--speaker", help="default: every speaker in the manifest")
    p.add_argument("--scores", help="score file to attach MOS statistics")
    p.add_argument("--frame-ms", type=float, default=25.0)
    p.add_argument("--hop-ms", type=float, default=10.0)
    p.add_argument("--jobs", type=int, default=1)
    add_format(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("eval", help="aggregate score files and compare conditions")
    p.add_argument("scores", nargs="?", help="single score file to aggregate")
    p.add_argument("--condition", action="append", type=_condition,
                   metavar="LABEL=PATH",
                   help="labeled score file; repeat for base/ref/candidate")
    p.add_argument("--speaker", help="speaker id for the comparison report")
    p.add_argument("--reference-embedding",
                   help="JSON array; enables similarity aggregation")
    p.add_argument("--jobs", type=int, default=1,
                   help="accepted for symmetry; eval reads precomputed scores")
    add_format(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("select", help="rank checkpoints and detect divergence")
    p.add_argument("series", help="JSON checkpoint series file")
    p.add_argument("--weights", type=_weights, default=(1.0, 0.0, 0.0),
                   metavar="W_MOS,W_SIM,W_SNR")
    p.add_argument("--mos-drop-threshold", type=float,
                   default=checkpoints.DEFAULT_MOS_DROP_THRESHOLD)
    add_format(p)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("mix", help="build a mixed-data manifest")
    p.add_argument("manifest", nargs="+")
    p.add_argument("--take", action="append", type=_take, required=True,
                   metavar="SPEAKER=SPEC", help="e.g. 2=2h (hours) or 1212=0.5f (fraction)")
    p.add_argument("--out", help="output manifest path (default: stdout)")
    p.set_defaults(func=_cmd_mix)

    p = sub.add_parser("bench", help="streaming latency benchmark")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--engine", help="command launching a chunk-protocol engine")
    mode.add_argument("--replay", help="schedule file for a virtual-clock replay")
    p.add_argument("--text", default="benchmark input text")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--timeout-s", type=float, default=latency.DEFAULT_TIMEOUT_S)
    p.add_argument("--include-warmup", action="store_true")
    add_format(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("report", help="re-render a JSON comparison report")
    p.add_argument("report")
    add_format(p)
    p.set_defaults(func=_cmd_report)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "eval" and not args.condition and not args.scores:
        ap.error("eval needs a score file or --condition entries")
    try:
        return args.func(args, sys.stdout)
    except (VoxgaugeError, FileNotFoundError, ZeroDivisionError, ValueError,
            json.JSONDecodeError) as exc:
        print(f"voxgauge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
