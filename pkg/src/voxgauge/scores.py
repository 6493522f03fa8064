"""Score-file contract and aggregation.

Score files are produced out of process (typically by the neural scorer
sidecar) and consumed here, so the primary toolkit never needs an ML
runtime: a UTF-8 JSON array of records, each carrying clip_id plus any of
dnsmos_ovrl (1..5), snr_db, embedding (fixed dimension per file). A record
may instead carry an `error` string for a clip the producer failed on.

Similarity between embeddings is cosine mapped onto [0, 1] by the unique
monotone affine map, (cos + 1) / 2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateClipId,
    EmptySet,
    MissingField,
    SchemaError,
    ZeroVector,
)


@dataclass(frozen=True)
class ScoreRecord:
    clip_id: str
    dnsmos_ovrl: float | None = None
    snr_db: float | None = None
    embedding: np.ndarray | None = None
    error: str | None = None

    def has_metrics(self) -> bool:
        return (self.dnsmos_ovrl is not None or self.snr_db is not None
                or self.embedding is not None)


@dataclass
class ScoreSet:
    """Validated score records keyed by clip_id, in file order."""

    records: dict[str, ScoreRecord] = field(default_factory=dict)
    embedding_dim: int | None = None

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records.values())

    def get(self, clip_id: str) -> ScoreRecord | None:
        return self.records.get(clip_id)

    def add(self, record: ScoreRecord) -> None:
        if record.clip_id in self.records:
            raise DuplicateClipId(record.clip_id)
        if record.embedding is not None:
            if self.embedding_dim is None:
                self.embedding_dim = len(record.embedding)
            elif len(record.embedding) != self.embedding_dim:
                raise DimensionMismatch(
                    f"clip {record.clip_id!r}: embedding of length "
                    f"{len(record.embedding)}, set uses {self.embedding_dim}"
                )
        self.records[record.clip_id] = record


@dataclass(frozen=True)
class AggregateMetrics:
    n: int
    mos_mean: float | None = None
    mos_std: float | None = None
    snr_mean_db: float | None = None
    similarity_mean: float | None = None


def _number(value, index: int, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"record {index}", name, f"record {index}: {name} must be a number")
    if not math.isfinite(value):
        raise SchemaError(f"record {index}", name, f"record {index}: {name} must be finite")
    return float(value)


def parse_score_record(obj, index: int) -> ScoreRecord:
    if not isinstance(obj, dict):
        raise SchemaError(f"record {index}", "record", f"record {index}: not an object")
    clip_id = obj.get("clip_id")
    if not isinstance(clip_id, str) or not clip_id:
        raise SchemaError(f"record {index}", "clip_id")

    mos = obj.get("dnsmos_ovrl")
    if mos is not None:
        mos = _number(mos, index, "dnsmos_ovrl")
        if not 1.0 <= mos <= 5.0:
            raise SchemaError(f"record {index}", "dnsmos_ovrl",
                              f"record {index}: dnsmos_ovrl {mos} outside [1, 5]")
    snr = obj.get("snr_db")
    if snr is not None:
        snr = _number(snr, index, "snr_db")

    emb = obj.get("embedding")
    if emb is not None:
        if not isinstance(emb, list) or not emb:
            raise SchemaError(f"record {index}", "embedding",
                              f"record {index}: embedding must be a nonempty array")
        emb = np.array([_number(v, index, "embedding") for v in emb], dtype=np.float64)

    error = obj.get("error")
    if error is not None and not isinstance(error, str):
        raise SchemaError(f"record {index}", "error")

    record = ScoreRecord(clip_id=clip_id, dnsmos_ovrl=mos, snr_db=snr,
                         embedding=emb, error=error)
    if not record.has_metrics() and record.error is None:
        raise SchemaError(f"record {index}", "metrics",
                          f"record {index}: no metric fields present")
    return record


def load_scores(path) -> ScoreSet:
    """Load a JSON array of score records. Empty arrays are valid."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(str(path), "json", f"{path}: {exc}") from exc
    if not isinstance(data, list):
        raise SchemaError(str(path), "root", f"{path}: top level must be an array")
    scores = ScoreSet()
    for i, obj in enumerate(data):
        scores.add(parse_score_record(obj, i))
    return scores


def similarity_01(a, b) -> float:
    """(cos(a, b) + 1) / 2: 1 for parallel, 0.5 for orthogonal, 0 for opposite."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"embedding shapes differ: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity undefined for a zero vector")
    cos = float(np.dot(a, b) / (na * nb))
    cos = max(-1.0, min(1.0, cos))
    return (cos + 1.0) / 2.0


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def aggregate(scores: ScoreSet, reference_embedding=None) -> AggregateMetrics:
    """Mean and sample std per metric over the records that carry it.

    With a reference embedding, similarity_mean is the mean of
    similarity_01(record.embedding, reference) and every record must carry
    an embedding.
    """
    records = [r for r in scores]
    if not records:
        raise EmptySet("cannot aggregate an empty score set")

    mos_vals = [r.dnsmos_ovrl for r in records if r.dnsmos_ovrl is not None]
    snr_vals = [r.snr_db for r in records if r.snr_db is not None]

    mos_mean = mos_std = snr_mean = sim_mean = None
    if mos_vals:
        mos_mean, mos_std = _mean_std(mos_vals)
    if snr_vals:
        snr_mean, _ = _mean_std(snr_vals)

    if reference_embedding is not None:
        missing = [r.clip_id for r in records if r.embedding is None]
        if missing:
            raise MissingField(
                f"similarity requested but records lack embeddings: {missing[:5]}"
            )
        sims = [similarity_01(r.embedding, reference_embedding) for r in records]
        sim_mean = float(np.mean(sims))

    return AggregateMetrics(
        n=len(records),
        mos_mean=mos_mean,
        mos_std=mos_std,
        snr_mean_db=snr_mean,
        similarity_mean=sim_mean,
    )
