#!/usr/bin/env python3
"""Regenerate the three bundled test WAVs under tests/data/.

Three contrasting one-second 16 kHz clips: a speech-like signal (bursty
sign-symmetric gamma amplitudes through a gentle lowpass), a tonal signal
with light noise, and quiet wideband noise. Deterministic.
"""

import os
import struct
import sys

import numpy as np

RATE = 16000
OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "tests", "data")


def write_pcm16(path, x):
    x = np.clip(x, -1.0, 1.0)
    payload = (x * 32767).astype("<i2").tobytes()
    fmt = struct.pack("<HHIIHH", 1, 1, RATE, RATE * 2, 2, 16)
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 4 + 8 + len(fmt) + 8 + len(payload)))
        fh.write(b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt)
        fh.write(b"data" + struct.pack("<I", len(payload)) + payload)


def speechlike(rng):
    x = rng.gamma(0.4, 1.0, RATE) * rng.choice((-1.0, 1.0), RATE)
    envelope = 0.25 + 0.75 * (np.sin(2 * np.pi * 2.5 * np.arange(RATE) / RATE) > 0)
    x *= envelope
    kernel = np.ones(8) / 8.0
    x = np.convolve(x, kernel, mode="same")
    return 0.6 * x / np.max(np.abs(x))


def tonal(rng):
    t = np.arange(RATE) / RATE
    x = 0.4 * np.sin(2 * np.pi * 220 * t) + 0.2 * np.sin(2 * np.pi * 660 * t)
    return x + 0.01 * rng.standard_normal(RATE)


def quiet_noise(rng):
    return 0.05 * rng.standard_normal(RATE)


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    rng = np.random.default_rng(161803)
    for name, make in (("speechlike", speechlike), ("tonal", tonal),
                       ("quiet_noise", quiet_noise)):
        path = os.path.join(OUT_DIR, f"{name}.wav")
        write_pcm16(path, make(rng))
        print(f"wrote {path}", file=sys.stderr)


if __name__ == "__main__":
    main()
