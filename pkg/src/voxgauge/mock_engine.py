"""Scripted engine speaking the chunk protocol, for tests and demos.

Emits chunks on a fixed schedule after receiving the request line, so a
wall-clock benchmark of this engine should reproduce the schedule within
scheduler jitter. Fault modes exercise the harness error paths.

Run as a module:

    python -m voxgauge.mock_engine --chunks 100:200,160:200
    python -m voxgauge.mock_engine --schedule sched.txt --sample-rate 24000
    python -m voxgauge.mock_engine --chunks 50:100 --fault bad-magic
"""

from __future__ import annotations

import argparse
import struct
import sys
import time

MAGIC = b"CHNK"

FAULTS = ("none", "no-handshake", "bad-magic", "truncate", "crash")


def _parse_chunks(spec: str) -> list[tuple[float, float]]:
    out = []
    for part in spec.split(","):
        arrival_ms, audio_ms = (float(v) for v in part.split(":"))
        out.append((arrival_ms / 1000.0, audio_ms / 1000.0))
    return out


def _read_schedule(path: str) -> list[tuple[float, float]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            arrival_ms, audio_ms = (float(v) for v in stripped.split())
            out.append((arrival_ms / 1000.0, audio_ms / 1000.0))
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="scripted chunk-protocol engine")
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--chunks", help="inline schedule 'arrival_ms:audio_ms,...'")
    src.add_argument("--schedule", help="schedule file with '<arrival_ms> <audio_ms>' lines")
    ap.add_argument("--sample-rate", type=int, default=16000)
    ap.add_argument("--fault", choices=FAULTS, default="none")
    args = ap.parse_args(argv)

    schedule = (_parse_chunks(args.chunks) if args.chunks
                else _read_schedule(args.schedule))
    out = sys.stdout.buffer

    if args.fault == "no-handshake":
        return 0  # exit silently; the harness sees EOF instead of a handshake

    out.write(f"NEUBENCH 1 {args.sample_rate}\n".encode("ascii"))
    out.flush()

    sys.stdin.readline()  # the request text; content is irrelevant here
    t0 = time.monotonic()

    for i, (arrival_s, audio_s) in enumerate(schedule):
        delay = t0 + arrival_s - time.monotonic()
        if delay > 0:
            time.sleep(delay)
        n_samples = int(round(audio_s * args.sample_rate))
        payload = bytes(2 * n_samples)
        if args.fault == "bad-magic" and i == 0:
            out.write(b"JUNK" + struct.pack("<I", len(payload)) + payload)
            out.flush()
            return 0
        if args.fault == "truncate" and i == 0:
            out.write(MAGIC + struct.pack("<I", len(payload)) + payload[: len(payload) // 2])
            out.flush()
            return 0
        out.write(MAGIC + struct.pack("<I", len(payload)) + payload)
        out.flush()
        if args.fault == "crash" and i == 0:
            return 3

    out.write(MAGIC + struct.pack("<I", 0))
    out.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
