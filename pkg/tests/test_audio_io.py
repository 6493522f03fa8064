import math
import wave

import numpy as np
import pytest

from voxgauge.audio_io import AudioClip, concat, load_wav, mixdown, read_wav_info, save_wav_float32
from voxgauge.errors import CorruptHeader, UnsupportedFormat
from wavgen import float32_wav, mulaw_wav, pcm16_wav, pcm24_wav, wav_bytes


def test_header_arithmetic_mono_16bit(tmp_path):
    path = pcm16_wav(tmp_path / "a.wav", np.zeros(24000, dtype=np.int16), rate=24000)
    clip = load_wav(path)
    assert clip.sample_rate == 24000
    assert clip.duration_seconds == 1.0
    assert clip.channels == 1
    assert clip.source_id == path


def test_mulaw_rejected(tmp_path):
    with pytest.raises(UnsupportedFormat):
        load_wav(mulaw_wav(tmp_path / "m.wav"))


def test_8bit_pcm_rejected(tmp_path):
    path = tmp_path / "b.wav"
    path.write_bytes(wav_bytes(1, 8, 1, 16000, bytes(32)))
    with pytest.raises(UnsupportedFormat):
        load_wav(path)


def test_too_many_channels_rejected(tmp_path):
    path = tmp_path / "c.wav"
    path.write_bytes(wav_bytes(1, 16, 4, 16000, bytes(64)))
    with pytest.raises(UnsupportedFormat):
        load_wav(path)


def test_out_of_range_sample_rate_rejected(tmp_path):
    path = tmp_path / "d.wav"
    path.write_bytes(wav_bytes(1, 16, 1, 4000, bytes(32)))
    with pytest.raises(UnsupportedFormat):
        load_wav(path)
    path.write_bytes(wav_bytes(1, 16, 1, 96000, bytes(32)))
    with pytest.raises(UnsupportedFormat):
        load_wav(path)


def test_opposite_stereo_mixes_to_silence(tmp_path):
    left = np.full(1000, 16384, dtype=np.int16)   # +0.5
    right = np.full(1000, -16384, dtype=np.int16)  # -0.5
    path = pcm16_wav(tmp_path / "s.wav", np.stack([left, right], axis=1))
    clip = load_wav(path)
    assert clip.channels == 1
    assert np.all(clip.samples == 0.0)


def test_stereo_decode_matches_stdlib_wave(tmp_path):
    rng = np.random.default_rng(42)
    frames = rng.integers(-32768, 32768, size=(4096, 2), dtype=np.int16)
    path = pcm16_wav(tmp_path / "r.wav", frames, rate=22050)

    with wave.open(path, "rb") as fh:
        assert fh.getnchannels() == 2
        raw = fh.readframes(fh.getnframes())
    ref = np.frombuffer(raw, dtype="<i2").reshape(-1, 2).astype(np.float64)
    ref = (ref / 32768.0).mean(axis=1).astype(np.float32)

    clip = load_wav(path)
    assert np.array_equal(clip.samples, ref)


def test_pcm24_full_scale_normalization(tmp_path):
    values = [-(1 << 23), (1 << 23) - 1, 0, 1, -1]
    path = pcm24_wav(tmp_path / "q.wav", values)
    clip = load_wav(path)
    expected = np.array(values, dtype=np.float64) / (1 << 23)
    assert np.array_equal(clip.samples, expected.astype(np.float32))
    assert clip.samples[0] == -1.0


def test_float32_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(7)
    samples = np.clip(rng.standard_normal(5000) * 0.3, -1.0, 1.0)
    clip = AudioClip(samples=samples.astype(np.float32),
                     sample_rate=16000, source_id="synthetic")
    out = tmp_path / "f.wav"
    save_wav_float32(clip, out)
    reloaded = load_wav(out)
    assert reloaded.sample_rate == 16000
    assert reloaded.samples.dtype == np.float32
    assert np.array_equal(reloaded.samples, clip.samples)


def test_float32_out_of_range_clamped(tmp_path):
    path = float32_wav(tmp_path / "g.wav", [2.0, -3.0, 0.25])
    clip = load_wav(path)
    assert clip.samples.tolist() == [1.0, -1.0, 0.25]


def test_truncated_data_chunk_is_corrupt(tmp_path):
    good = wav_bytes(1, 16, 1, 16000, bytes(1000))
    path = tmp_path / "t.wav"
    path.write_bytes(good[:-200])
    with pytest.raises(CorruptHeader):
        load_wav(path)


def test_missing_data_chunk_is_corrupt(tmp_path):
    fmt = wav_bytes(1, 16, 1, 16000, b"")[:36]  # RIFF + fmt only
    path = tmp_path / "n.wav"
    path.write_bytes(b"RIFF" + len(fmt[8:]).to_bytes(4, "little") + fmt[8:])
    with pytest.raises(CorruptHeader):
        load_wav(path)


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_wav("/nonexistent/clip.wav")


def test_read_wav_info_does_not_need_valid_samples(tmp_path):
    path = pcm16_wav(tmp_path / "i.wav", np.zeros(8000, dtype=np.int16), rate=8000)
    info = read_wav_info(path)
    assert info.n_frames == 8000
    assert info.duration_seconds == 1.0
    assert info.bits_per_sample == 16


def test_mixdown_linearity_within_one_ulp():
    rng = np.random.default_rng(3)
    a = (rng.standard_normal((2048, 2)) * 0.4).astype(np.float32)
    b = (rng.standard_normal((2048, 2)) * 0.4).astype(np.float32)
    lhs = mixdown(a + b)
    rhs = mixdown(a) + mixdown(b)
    # one ulp at the operand scale: the per-channel sums a+b are the largest
    # values either side rounds through
    atol = np.spacing(np.float32(np.abs(a + b).max()))
    assert np.all(np.abs(lhs - rhs) <= atol)


def test_duration_additivity():
    a = AudioClip(samples=np.zeros(16000, dtype=np.float32), sample_rate=16000)
    b = AudioClip(samples=np.zeros(8000, dtype=np.float32), sample_rate=16000)
    joined = concat([a, b])
    assert joined.duration_seconds == a.duration_seconds + b.duration_seconds == 1.5
    # general case: duration is sample-count additive by construction
    c = AudioClip(samples=np.zeros(12345, dtype=np.float32), sample_rate=24000)
    d = AudioClip(samples=np.zeros(6789, dtype=np.float32), sample_rate=24000)
    joined = concat([c, d])
    assert len(joined.samples) == 12345 + 6789
    assert joined.duration_seconds == (12345 + 6789) / 24000
    assert math.isclose(joined.duration_seconds,
                        c.duration_seconds + d.duration_seconds, rel_tol=1e-15)


def test_concat_rejects_mixed_rates():
    a = AudioClip(samples=np.zeros(10, dtype=np.float32), sample_rate=16000)
    b = AudioClip(samples=np.zeros(10, dtype=np.float32), sample_rate=24000)
    with pytest.raises(ValueError):
        concat([a, b])


def test_clip_requires_positive_rate():
    with pytest.raises(ValueError):
        AudioClip(samples=np.zeros(4, dtype=np.float32), sample_rate=0)
