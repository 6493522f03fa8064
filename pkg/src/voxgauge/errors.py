"""Exception hierarchy for the toolkit.

Every domain error raised by voxgauge derives from VoxgaugeError so callers
(and the CLI) can catch one base class. Builtin FileNotFoundError and
ZeroDivisionError are used where Python already has the exact concept.
"""


class VoxgaugeError(Exception):
    """Base class for all toolkit errors."""


# audio-io

class UnsupportedFormat(VoxgaugeError):
    """WAV encoding outside the supported set (PCM 16/24, float32, <=2 ch)."""


class CorruptHeader(VoxgaugeError):
    """RIFF/WAVE chunk sizes inconsistent with the file length."""


# signal-metrics

class DegenerateSignal(VoxgaugeError):
    """Clip is all zeros or too short to carry a meaningful estimate."""


class ClipTooShort(VoxgaugeError):
    """Clip shorter than one analysis frame."""


# manifests / datasets

class SchemaError(VoxgaugeError):
    """A record failed validation. Carries the location and field name."""

    def __init__(self, location, field, message=None):
        self.location = location
        self.field = field
        super().__init__(message or f"schema error at {location}: field {field!r}")


class DuplicateClipId(VoxgaugeError):
    def __init__(self, clip_id):
        self.clip_id = clip_id
        super().__init__(f"duplicate clip_id {clip_id!r}")


class MissingAudio(VoxgaugeError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"audio file not found: {path}")


class UnknownSpeaker(VoxgaugeError):
    def __init__(self, speaker_id):
        self.speaker_id = speaker_id
        super().__init__(f"speaker {speaker_id!r} not present in manifest")


class EmptyResult(VoxgaugeError):
    """An operation produced an empty manifest or selection."""


# score files

class DimensionMismatch(VoxgaugeError):
    """Embeddings of unequal length within one set or one comparison."""


class ZeroVector(VoxgaugeError):
    """Cosine similarity is undefined for a zero-norm embedding."""


class EmptySet(VoxgaugeError):
    """Aggregation over an empty score set."""


class MissingField(VoxgaugeError):
    """A requested aggregate has no carriers in the score set."""


# reporting

class MissingBase(VoxgaugeError):
    """Comparison requested without a 'base' condition."""


# checkpoint selection

class InsufficientData(VoxgaugeError):
    """Fewer checkpoint points than the operation needs."""


class MissingMetric(VoxgaugeError):
    """A checkpoint point lacks a metric that carries nonzero weight."""


class DegenerateWeights(VoxgaugeError):
    """Ranking weights are all zero or negative."""


# latency bench

class ZeroDuration(VoxgaugeError):
    """Real-time factor is undefined for zero audio duration."""


class ProtocolError(VoxgaugeError):
    """Engine violated the chunk wire protocol."""


class EngineCrashed(VoxgaugeError):
    def __init__(self, returncode, detail=""):
        self.returncode = returncode
        msg = f"engine exited with status {returncode} before end of stream"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class BenchTimeout(VoxgaugeError):
    """Engine failed to produce protocol data before the deadline."""
