"""Streaming latency benchmark for black-box TTS engines.

Wire protocol (bit-exact):

  engine stdout:  one handshake line  b"NEUBENCH 1 <sample_rate>\\n"
  harness stdin:  the input text, UTF-8, terminated by LF
  engine stdout:  frames of  b"CHNK" + uint32le payload length + payload
                  (payload is 16-bit little-endian mono PCM); a zero-length
                  frame marks end of stream

Chunk audio duration is payload_bytes / (2 * sample_rate), so per-chunk
accounting is exact byte arithmetic. Timing uses the monotonic clock; the
request clock starts when the input text is written. A schedule-file replay
mode (lines "<arrival_ms> <audio_ms>") produces identical reports on every
run, for tests that cannot tolerate wall-clock jitter.

Real engines, mock engines and replays are interchangeable: anything that
speaks the protocol can be benchmarked.
"""

from __future__ import annotations

import math
import os
import select
import shlex
import struct
import subprocess
import time
from dataclasses import dataclass
from typing import NamedTuple

from .errors import BenchTimeout, EngineCrashed, ProtocolError, ZeroDuration

MAGIC = b"CHNK"
HANDSHAKE_PREFIX = "NEUBENCH 1 "
DEFAULT_TIMEOUT_S = 120.0
_MAX_PAYLOAD = 1 << 30


@dataclass(frozen=True)
class ChunkEvent:
    index: int            # 1-based
    arrival_s: float      # seconds since the request was sent
    audio_duration_s: float


class MeanStd(NamedTuple):
    mean: float
    std: float


@dataclass(frozen=True)
class LatencyReport:
    runs: int
    first_chunk_latency_s: MeanStd
    per_chunk_rtf: list[float]   # mean RTF by 1-based chunk index
    total_time_s: float          # mean time to end-of-stream
    total_audio_s: float         # mean audio seconds produced per run


def rtf(elapsed_s: float, audio_duration_s: float) -> float:
    """Real-time factor: processing time over audio duration produced."""
    if audio_duration_s <= 0:
        raise ZeroDuration(f"audio duration must be positive, got {audio_duration_s}")
    if elapsed_s < 0:
        raise ValueError(f"elapsed time must be >= 0, got {elapsed_s}")
    return elapsed_s / audio_duration_s


class _StreamReader:
    """Buffered non-blocking reads from a pipe, bounded by a deadline."""

    def __init__(self, stream, deadline: float):
        self._fd = stream.fileno()
        os.set_blocking(self._fd, False)
        self._buf = bytearray()
        self._eof = False
        self._deadline = deadline

    def _fill(self) -> None:
        if self._eof:
            return
        remaining = self._deadline - time.monotonic()
        if remaining <= 0:
            raise BenchTimeout("engine did not produce data before the deadline")
        ready, _, _ = select.select([self._fd], [], [], min(remaining, 0.25))
        if not ready:
            return
        chunk = os.read(self._fd, 65536)
        if chunk:
            self._buf.extend(chunk)
        else:
            self._eof = True

    def read_exact(self, n: int) -> bytes:
        """Return exactly n bytes, or fewer only at end of stream."""
        while len(self._buf) < n and not self._eof:
            self._fill()
        take = min(n, len(self._buf))
        out = bytes(self._buf[:take])
        del self._buf[:take]
        return out

    def read_line(self, limit: int = 4096) -> bytes:
        while b"\n" not in self._buf and not self._eof:
            if len(self._buf) > limit:
                raise ProtocolError("handshake line too long")
            self._fill()
        if b"\n" not in self._buf:
            return b""
        idx = self._buf.index(b"\n") + 1
        out = bytes(self._buf[:idx])
        del self._buf[:idx]
        return out


def _parse_handshake(line: bytes) -> int:
    text = line.decode("ascii", errors="replace").rstrip("\r\n")
    if not text.startswith(HANDSHAKE_PREFIX):
        raise ProtocolError(f"bad handshake line: {text!r}")
    try:
        sample_rate = int(text[len(HANDSHAKE_PREFIX):])
    except ValueError:
        raise ProtocolError(f"bad handshake sample rate: {text!r}") from None
    if sample_rate <= 0:
        raise ProtocolError(f"handshake sample rate must be positive: {sample_rate}")
    return sample_rate


def _engine_failure(proc, context: str):
    rc = proc.poll()
    if rc is None:
        # EOF usually means the process is exiting; give it a moment so we
        # can tell a crash from a clean-but-protocol-breaking exit
        try:
            rc = proc.wait(timeout=2.0)
        except subprocess.TimeoutExpired:
            rc = None
    if rc is not None and rc != 0:
        return EngineCrashed(rc, context)
    return ProtocolError(context)


def _bench_once(command, text: str, timeout_s: float) -> tuple[list[ChunkEvent], float]:
    """One engine launch; returns chunk events and the end-of-stream time."""
    if isinstance(command, str):
        command = shlex.split(command)
    deadline = time.monotonic() + timeout_s
    proc = subprocess.Popen(command, stdin=subprocess.PIPE,
                            stdout=subprocess.PIPE, stderr=subprocess.DEVNULL)
    try:
        reader = _StreamReader(proc.stdout, deadline)
        line = reader.read_line()
        if not line:
            raise _engine_failure(proc, "stream ended before handshake")
        sample_rate = _parse_handshake(line)

        t0 = time.monotonic()
        try:
            proc.stdin.write(text.encode("utf-8") + b"\n")
            proc.stdin.flush()
            proc.stdin.close()
        except BrokenPipeError:
            raise _engine_failure(proc, "engine closed stdin before the request") from None

        events: list[ChunkEvent] = []
        while True:
            header = reader.read_exact(8)
            if len(header) < 8:
                raise _engine_failure(proc, "stream ended mid-frame before end marker")
            magic, length = struct.unpack("<4sI", header)
            if magic != MAGIC:
                raise ProtocolError(f"bad frame magic {magic!r}")
            if length == 0:
                end_time = time.monotonic() - t0
                break
            if length > _MAX_PAYLOAD:
                raise ProtocolError(f"frame of {length} bytes exceeds sanity cap")
            if length % 2 != 0:
                raise ProtocolError(f"odd payload length {length} for 16-bit PCM")
            payload = reader.read_exact(length)
            if len(payload) < length:
                raise _engine_failure(proc, "stream ended inside a frame payload")
            events.append(ChunkEvent(
                index=len(events) + 1,
                arrival_s=time.monotonic() - t0,
                audio_duration_s=length / (2.0 * sample_rate),
            ))
        if not events:
            raise ProtocolError("engine produced no audio chunks")
        return events, end_time
    finally:
        try:
            proc.kill()
        except OSError:
            pass
        proc.wait()


def _sample_std(values: list[float]) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    mean = sum(values) / n
    return math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))


def _chunk_rtfs(events: list[ChunkEvent]) -> list[float]:
    out = []
    prev_arrival = 0.0
    for ev in events:
        out.append(rtf(ev.arrival_s - prev_arrival, ev.audio_duration_s))
        prev_arrival = ev.arrival_s
    return out


def _aggregate(runs: list[tuple[list[ChunkEvent], float]]) -> LatencyReport:
    latencies = [events[0].arrival_s for events, _ in runs]
    rtf_lists = [_chunk_rtfs(events) for events, _ in runs]
    max_chunks = max(len(r) for r in rtf_lists)
    per_chunk = []
    for i in range(max_chunks):
        vals = [r[i] for r in rtf_lists if len(r) > i]
        per_chunk.append(sum(vals) / len(vals))
    totals = [end for _, end in runs]
    audio = [sum(ev.audio_duration_s for ev in events) for events, _ in runs]
    return LatencyReport(
        runs=len(runs),
        first_chunk_latency_s=MeanStd(sum(latencies) / len(latencies),
                                      _sample_std(latencies)),
        per_chunk_rtf=per_chunk,
        total_time_s=sum(totals) / len(totals),
        total_audio_s=sum(audio) / len(audio),
    )


def run_bench(engine_command, text: str, n_runs: int,
              timeout_s: float = DEFAULT_TIMEOUT_S,
              include_warmup: bool = False) -> LatencyReport:
    """Launch the engine n_runs times and aggregate mean +/- std figures.

    One extra warm-up run happens first and is excluded from the aggregates
    unless include_warmup is set (engine initialization would otherwise bias
    first-chunk latency).
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    runs = []
    total = n_runs if include_warmup else n_runs + 1
    for i in range(total):
        result = _bench_once(engine_command, text, timeout_s)
        if include_warmup or i > 0:
            runs.append(result)
    return _aggregate(runs)


def parse_schedule(path) -> list[tuple[float, float]]:
    """Read schedule lines "<arrival_ms> <audio_ms>" into seconds."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected '<arrival_ms> <audio_ms>'")
            arrival_ms, audio_ms = (float(p) for p in parts)
            if audio_ms <= 0:
                raise ValueError(f"{path}:{lineno}: audio duration must be positive")
            out.append((arrival_ms / 1000.0, audio_ms / 1000.0))
    if not out:
        raise ValueError(f"{path}: empty schedule")
    arrivals = [a for a, _ in out]
    if any(b <= a for a, b in zip(arrivals, arrivals[1:])):
        raise ValueError(f"{path}: arrival times must be strictly increasing")
    return out


def replay_bench(schedule_path) -> LatencyReport:
    """Virtual-clock replay of a schedule file; bit-identical across runs."""
    schedule = parse_schedule(schedule_path)
    events = [ChunkEvent(index=i + 1, arrival_s=arrival, audio_duration_s=dur)
              for i, (arrival, dur) in enumerate(schedule)]
    return _aggregate([(events, events[-1].arrival_s)])
