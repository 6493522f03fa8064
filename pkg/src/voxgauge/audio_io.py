"""WAV decoding into a canonical in-memory clip.

Supported encodings: PCM 16-bit, PCM 24-bit, IEEE float-32; 1 or 2 channels;
sample rates 8000..48000 Hz. Stereo is mixed down to mono (arithmetic mean of
the channels), integer PCM is normalized by 2^(bits-1) so full negative scale
maps to -1.0. No resampling happens here; sample rate is data, not
configuration.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import CorruptHeader, UnsupportedFormat

_FORMAT_PCM = 1
_FORMAT_IEEE_FLOAT = 3
_RATE_MIN = 8000
_RATE_MAX = 48000


@dataclass(frozen=True)
class AudioClip:
    """Mono waveform with its sample rate.

    samples are float32 in [-1.0, 1.0]; source_id is an opaque identifier,
    by default the path the clip was loaded from.
    """

    samples: np.ndarray
    sample_rate: int
    channels: int = 1
    source_id: str = ""

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate

    def scaled(self, gain: float) -> "AudioClip":
        """Copy with samples multiplied by gain (dtype preserved, no clipping)."""
        return AudioClip(
            samples=self.samples * self.samples.dtype.type(gain),
            sample_rate=self.sample_rate,
            channels=self.channels,
            source_id=self.source_id,
        )


@dataclass(frozen=True)
class WavInfo:
    """Header-level facts about a WAV file, read without decoding samples."""

    sample_rate: int
    channels: int
    bits_per_sample: int
    format_code: int
    n_frames: int
    data_offset: int = field(repr=False, default=0)
    data_size: int = field(repr=False, default=0)

    @property
    def duration_seconds(self) -> float:
        return self.n_frames / self.sample_rate


def _walk_chunks(fh, file_size: int, path: str) -> WavInfo:
    header = fh.read(12)
    if len(header) < 12 or header[:4] != b"RIFF" or header[8:12] != b"WAVE":
        raise CorruptHeader(f"{path}: not a RIFF/WAVE file")
    riff_size = struct.unpack("<I", header[4:8])[0]
    if riff_size + 8 > file_size:
        raise CorruptHeader(
            f"{path}: RIFF declares {riff_size + 8} bytes, file has {file_size}"
        )

    fmt = None
    data_offset = data_size = None
    pos = 12
    while pos + 8 <= file_size:
        fh.seek(pos)
        hdr = fh.read(8)
        if len(hdr) < 8:
            break
        cid, csize = struct.unpack("<4sI", hdr)
        body = pos + 8
        if body + csize > file_size:
            raise CorruptHeader(
                f"{path}: chunk {cid!r} of {csize} bytes overruns the file"
            )
        if cid == b"fmt ":
            if csize < 16:
                raise CorruptHeader(f"{path}: fmt chunk truncated ({csize} bytes)")
            fmt = struct.unpack("<HHIIHH", fh.read(16))
        elif cid == b"data":
            data_offset, data_size = body, csize
        pos = body + csize + (csize & 1)  # chunks are padded to even length

    if fmt is None or data_offset is None:
        raise CorruptHeader(f"{path}: missing fmt or data chunk")

    format_code, channels, rate, _byte_rate, block_align, bits = fmt
    if format_code not in (_FORMAT_PCM, _FORMAT_IEEE_FLOAT):
        raise UnsupportedFormat(f"{path}: compression code {format_code} not supported")
    if format_code == _FORMAT_PCM and bits not in (16, 24):
        raise UnsupportedFormat(f"{path}: {bits}-bit PCM not supported")
    if format_code == _FORMAT_IEEE_FLOAT and bits != 32:
        raise UnsupportedFormat(f"{path}: {bits}-bit float not supported")
    if channels not in (1, 2):
        raise UnsupportedFormat(f"{path}: {channels} channels not supported")
    if not _RATE_MIN <= rate <= _RATE_MAX:
        raise UnsupportedFormat(f"{path}: sample rate {rate} outside [8000, 48000]")

    expected_align = channels * bits // 8
    if block_align != expected_align:
        raise CorruptHeader(
            f"{path}: block align {block_align} != channels*bits/8 ({expected_align})"
        )
    if data_size % block_align != 0:
        raise CorruptHeader(f"{path}: data size {data_size} not frame-aligned")

    return WavInfo(
        sample_rate=rate,
        channels=channels,
        bits_per_sample=bits,
        format_code=format_code,
        n_frames=data_size // block_align,
        data_offset=data_offset,
        data_size=data_size,
    )


def read_wav_info(path) -> WavInfo:
    """Parse the header only; used for fast manifest duration fills."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    file_size = os.path.getsize(path)
    with open(path, "rb") as fh:
        return _walk_chunks(fh, file_size, path)


def _decode(raw: bytes, info: WavInfo) -> np.ndarray:
    if info.format_code == _FORMAT_IEEE_FLOAT:
        x = np.frombuffer(raw, dtype="<f4").astype(np.float32)
        if not np.all(np.isfinite(x)):
            raise CorruptHeader("non-finite float samples in data chunk")
        x = np.clip(x, -1.0, 1.0)
    elif info.bits_per_sample == 16:
        x = np.frombuffer(raw, dtype="<i2").astype(np.float32) / np.float32(32768.0)
    else:  # 24-bit PCM, sign-extended by hand
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = np.where(v >= 1 << 23, v - (1 << 24), v)
        x = v.astype(np.float32) / np.float32(1 << 23)
    return x


def mixdown(frames: np.ndarray) -> np.ndarray:
    """Average interleaved channels into mono. frames shape: (n, channels)."""
    if frames.ndim == 1:
        return frames.astype(np.float32)
    return frames.mean(axis=1, dtype=np.float64).astype(np.float32)


def load_wav(path, source_id: str | None = None) -> AudioClip:
    """Decode a WAV file into a normalized mono AudioClip."""
    path = os.fspath(path)
    info = read_wav_info(path)
    with open(path, "rb") as fh:
        fh.seek(info.data_offset)
        raw = fh.read(info.data_size)
    if len(raw) != info.data_size:
        raise CorruptHeader(f"{path}: data chunk shorter than declared")
    x = _decode(raw, info)
    if info.channels == 2:
        x = mixdown(x.reshape(-1, 2))
    return AudioClip(
        samples=x,
        sample_rate=info.sample_rate,
        channels=1,
        source_id=source_id if source_id is not None else path,
    )


def save_wav_float32(clip: AudioClip, path) -> None:
    """Write a clip as IEEE float-32 WAV. Reloading reproduces samples bit-exactly."""
    path = os.fspath(path)
    x = np.asarray(clip.samples, dtype="<f4")
    data = x.tobytes()
    byte_rate = clip.sample_rate * 4
    with open(path, "wb") as fh:
        fh.write(b"RIFF")
        fh.write(struct.pack("<I", 4 + (8 + 16) + (8 + 4) + (8 + len(data))))
        fh.write(b"WAVE")
        fh.write(b"fmt " + struct.pack("<IHHIIHH", 16, _FORMAT_IEEE_FLOAT,
                                       1, clip.sample_rate, byte_rate, 4, 32))
        fh.write(b"fact" + struct.pack("<II", 4, len(x)))
        fh.write(b"data" + struct.pack("<I", len(data)))
        fh.write(data)


def concat(clips) -> AudioClip:
    """Concatenate clips recorded at one sample rate."""
    clips = list(clips)
    if not clips:
        raise ValueError("nothing to concatenate")
    rates = {c.sample_rate for c in clips}
    if len(rates) != 1:
        raise ValueError(f"sample rates differ: {sorted(rates)}")
    return AudioClip(
        samples=np.concatenate([c.samples for c in clips]).astype(np.float32),
        sample_rate=clips[0].sample_rate,
        channels=1,
        source_id="+".join(c.source_id for c in clips if c.source_id),
    )
