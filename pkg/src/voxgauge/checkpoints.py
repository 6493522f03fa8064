"""Loss-quality divergence detection and perceptual checkpoint ranking.

Validation loss is an unreliable proxy for perceptual quality in LM-based
TTS fine-tuning: loss can keep improving while MOS degrades. The detector
looks for a contiguous stretch of checkpoints where validation loss is
non-increasing (with a net decrease) while MOS falls by at least a
threshold. The ranker orders checkpoints purely by perceptual metrics;
loss values are accepted in the series but never enter the score.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateWeights,
    InsufficientData,
    MissingMetric,
    SchemaError,
)

DEFAULT_MOS_DROP_THRESHOLD = 0.2


@dataclass(frozen=True)
class CheckpointPoint:
    step: int
    train_loss: float | None = None
    val_loss: float | None = None
    mos: float | None = None
    similarity_01: float | None = None
    snr_db: float | None = None

    def __post_init__(self):
        for name in ("train_loss", "val_loss"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be nonnegative, got {v}")


@dataclass(frozen=True)
class TrainingRunMeta:
    """Descriptive fine-tuning metadata; carried along, never used in math."""

    adapter_rank: int
    adapter_alpha: float
    batch_size: int
    epochs: float

    def __post_init__(self):
        for name in ("adapter_rank", "adapter_alpha", "batch_size", "epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class DivergenceFinding:
    diverged: bool
    window: tuple[int, int] | None
    mos_drop: float
    loss_drop: float


def _check_steps(series) -> list[CheckpointPoint]:
    series = list(series)
    steps = [p.step for p in series]
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise ValueError(f"steps must be strictly increasing, got {steps}")
    return series


def detect_divergence(series, mos_drop_threshold: float = DEFAULT_MOS_DROP_THRESHOLD
                      ) -> DivergenceFinding:
    """Report the loss-decreasing window with the largest net MOS drop.

    diverged is true iff some contiguous window (over the points carrying
    both val_loss and mos) has non-increasing val_loss with a net decrease
    and a net MOS drop of at least the threshold. Ties on the drop break
    toward the earliest, then shortest, window.
    """
    series = _check_steps(series)
    pts = [p for p in series if p.val_loss is not None and p.mos is not None]
    if len(pts) < 2:
        raise InsufficientData(
            f"need >= 2 points with val_loss and mos, have {len(pts)}"
        )

    # ok_prefix[i] is true iff val_loss does not increase from pts[i] to pts[i+1]
    ok = [pts[i + 1].val_loss <= pts[i].val_loss for i in range(len(pts) - 1)]
    best = None  # (mos_drop, start_idx, end_idx, loss_drop)
    for i in range(len(pts)):
        j = i + 1
        while j < len(pts) and ok[j - 1]:
            loss_drop = pts[i].val_loss - pts[j].val_loss
            if loss_drop > 0:
                drop = pts[i].mos - pts[j].mos
                if best is None or drop > best[0]:
                    best = (drop, i, j, loss_drop)
            j += 1

    if best is None:
        return DivergenceFinding(diverged=False, window=None,
                                 mos_drop=0.0, loss_drop=0.0)
    drop, i, j, loss_drop = best
    return DivergenceFinding(
        diverged=drop >= mos_drop_threshold,
        window=(pts[i].step, pts[j].step),
        mos_drop=drop,
        loss_drop=loss_drop,
    )


_METRIC_ORDER = ("mos", "similarity_01", "snr_db")


def rank_checkpoints(series, weights=(1.0, 0.0, 0.0)) -> list[int]:
    """Order steps by weighted z-scores of (mos, similarity_01, snr_db).

    Metrics live on incomparable scales, so each weighted metric is
    standardized across the series before mixing (zero spread gives zero
    z-scores). Ties break toward the smaller step. Positive affine
    transforms of any one metric leave the ordering unchanged.
    """
    series = _check_steps(series)
    if not series:
        raise InsufficientData("empty checkpoint series")
    w = tuple(float(v) for v in weights)
    if len(w) != len(_METRIC_ORDER):
        raise DegenerateWeights(f"expected {len(_METRIC_ORDER)} weights, got {len(w)}")
    if any(v < 0 for v in w) or not any(w):
        raise DegenerateWeights(f"weights must be >= 0 and not all zero: {w}")

    scores = np.zeros(len(series))
    for weight, name in zip(w, _METRIC_ORDER):
        if weight == 0:
            continue
        vals = [getattr(p, name) for p in series]
        missing = [p.step for p, v in zip(series, vals) if v is None]
        if missing:
            raise MissingMetric(f"{name} absent at step(s) {missing}")
        arr = np.asarray(vals, dtype=np.float64)
        std = arr.std(ddof=1) if arr.size > 1 else 0.0
        z = np.zeros_like(arr) if std == 0 else (arr - arr.mean()) / std
        scores += weight * z

    order = sorted(range(len(series)), key=lambda i: (-scores[i], series[i].step))
    return [series[i].step for i in order]


def load_checkpoint_series(path) -> tuple[list[CheckpointPoint], TrainingRunMeta | None]:
    """Read a JSON array of checkpoint points.

    A leading object without a "step" key is parsed as the run-meta header.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise SchemaError(str(path), "root", f"{path}: top level must be an array")

    meta = None
    start = 0
    if data and isinstance(data[0], dict) and "step" not in data[0]:
        head = data[0]
        try:
            meta = TrainingRunMeta(
                adapter_rank=int(head["adapter_rank"]),
                adapter_alpha=float(head["adapter_alpha"]),
                batch_size=int(head["batch_size"]),
                epochs=float(head["epochs"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError("record 0", "meta", f"bad run-meta header: {exc}") from exc
        start = 1

    points = []
    for i, obj in enumerate(data[start:], start=start):
        if not isinstance(obj, dict) or "step" not in obj:
            raise SchemaError(f"record {i}", "step")
        try:
            points.append(CheckpointPoint(
                step=int(obj["step"]),
                train_loss=None if obj.get("train_loss") is None else float(obj["train_loss"]),
                val_loss=None if obj.get("val_loss") is None else float(obj["val_loss"]),
                mos=None if obj.get("mos") is None else float(obj["mos"]),
                similarity_01=None if obj.get("similarity_01") is None else float(obj["similarity_01"]),
                snr_db=None if obj.get("snr_db") is None else float(obj["snr_db"]),
            ))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"record {i}", "value", f"record {i}: {exc}") from exc
    _check_steps(points)
    return points, meta
