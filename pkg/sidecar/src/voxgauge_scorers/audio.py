"""Minimal WAV reader for the sidecar: PCM 16/24 and float-32, mono/stereo.

Kept independent of the main toolkit on purpose; the two packages share file
formats, not code.
"""

import os
import struct

import numpy as np


class AudioReadError(Exception):
    pass


def read_wav(path):
    """Return (samples, sample_rate): mono float64 in [-1, 1]."""
    path = os.fspath(path)
    size = os.path.getsize(path)
    with open(path, "rb") as fh:
        head = fh.read(12)
        if len(head) < 12 or head[:4] != b"RIFF" or head[8:12] != b"WAVE":
            raise AudioReadError(f"{path}: not a RIFF/WAVE file")
        fmt = None
        data = None
        pos = 12
        while pos + 8 <= size:
            fh.seek(pos)
            cid, csize = struct.unpack("<4sI", fh.read(8))
            if pos + 8 + csize > size:
                raise AudioReadError(f"{path}: chunk {cid!r} overruns the file")
            if cid == b"fmt ":
                fmt = struct.unpack("<HHIIHH", fh.read(16))
            elif cid == b"data":
                data = fh.read(csize)
            pos += 8 + csize + (csize & 1)
    if fmt is None or data is None:
        raise AudioReadError(f"{path}: missing fmt or data chunk")

    code, channels, rate, _rate_b, _align, bits = fmt
    if channels not in (1, 2):
        raise AudioReadError(f"{path}: {channels} channels unsupported")
    if code == 1 and bits == 16:
        x = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    elif code == 1 and bits == 24:
        b = np.frombuffer(data, dtype=np.uint8)
        b = b[: len(b) - len(b) % 3].reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = np.where(v >= 1 << 23, v - (1 << 24), v)
        x = v.astype(np.float64) / float(1 << 23)
    elif code == 3 and bits == 32:
        x = np.frombuffer(data, dtype="<f4").astype(np.float64)
        x = np.clip(x, -1.0, 1.0)
    else:
        raise AudioReadError(f"{path}: format code {code} / {bits}-bit unsupported")

    if channels == 2:
        x = x[: len(x) - len(x) % 2].reshape(-1, 2).mean(axis=1)
    if x.size == 0:
        raise AudioReadError(f"{path}: empty data chunk")
    return x, rate
