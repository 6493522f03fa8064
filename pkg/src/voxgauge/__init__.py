"""voxgauge: evaluation toolkit for LLM-backbone TTS fine-tuning.

Reference-free speech quality metrics (blind SNR, frame energy), per-speaker
dataset statistics with an adaptation-outcome forecast, score aggregation and
comparison reports, perceptual checkpoint selection, mixed-data manifest
construction and a streaming latency benchmark harness.
"""

from .audio_io import AudioClip, concat, load_wav, mixdown, read_wav_info, save_wav_float32
from .checkpoints import (
    CheckpointPoint,
    DivergenceFinding,
    TrainingRunMeta,
    detect_divergence,
    load_checkpoint_series,
    rank_checkpoints,
)
from .dataset import (
    AdaptationForecast,
    DecodingParams,
    Manifest,
    ManifestEntry,
    MixTarget,
    SpeakerDatasetStats,
    VariabilityClass,
    build_mix_manifest,
    classify_variability,
    forecast_for_std,
    load_manifest,
    recommend_decoding,
    speaker_stats,
    tokenize_transcript,
    write_manifest,
)
from .latency import (
    ChunkEvent,
    LatencyReport,
    MeanStd,
    parse_schedule,
    replay_bench,
    rtf,
    run_bench,
)
from .reporting import (
    ComparisonReport,
    ConditionAggregates,
    comparison_report,
    pct_increase,
    render,
    report_from_json,
    report_to_dict,
)
from .scores import AggregateMetrics, ScoreRecord, ScoreSet, aggregate, load_scores, similarity_01
from .signal_metrics import (
    EnergyProfile,
    SnrEstimate,
    energy_profile,
    load_beta_table,
    wada_snr,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
