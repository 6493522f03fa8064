"""Scoring backends.

Two families:

- Pretrained ONNX models (the intended production path): a MOS model that
  emits an overall 1-5 score and a speaker-embedding model that maps a
  waveform to a fixed-dimension vector. Checkpoints are fetched by
  scripts/fetch_models.py, never vendored.
- Deterministic DSP baselines for environments without a model runtime:
  a signal-statistics MOS proxy and a spectral-statistics embedding. These
  are stand-ins with the same contract (range, determinism, unit-norm
  embeddings), not perceptual models; every score file records which
  backend produced it.
"""

import numpy as np


class ModelLoadError(Exception):
    pass


def _frame(x, frame, hop):
    if len(x) < frame:
        return np.empty((0, frame))
    n = (len(x) - frame) // hop + 1
    idx = np.arange(frame)[None, :] + hop * np.arange(n)[:, None]
    return x[idx]


class DspMosProxy:
    """Signal-statistics stand-in for a neural MOS model.

    Combines an amplitude-distribution sparseness statistic (high for clean
    speech-like signals, low for noise), a clipping penalty, and a silence
    penalty into a monotone [1, 5] score. Deterministic by construction.
    """

    model_id = "dsp-mos-proxy-v1"

    def score(self, samples: np.ndarray, rate: int) -> float:
        mag = np.abs(samples)
        nz = np.maximum(mag[mag > 0], 1e-10)
        if nz.size == 0:
            return 1.0
        beta = float(np.log(nz.mean()) - np.log(nz).mean())
        quality = 1.0 / (1.0 + np.exp(-6.0 * (beta - 0.9)))

        clip_frac = float(np.mean(mag >= 0.985))
        frames = _frame(samples, max(int(0.02 * rate), 1), max(int(0.02 * rate), 1))
        if frames.shape[0]:
            rms = np.sqrt((frames * frames).mean(axis=1))
            silence_frac = float(np.mean(rms < 1e-3))
        else:
            silence_frac = 0.0

        score = 1.0 + 4.0 * quality * (1.0 - 0.5 * silence_frac) \
            * max(0.0, 1.0 - 4.0 * clip_frac)
        return float(min(5.0, max(1.0, score)))


class SpectralEmbedder:
    """Deterministic spectral-statistics voice print.

    Log-energy mean and spread per mel band over 32 ms frames, L2-normalized.
    Not a trained speaker model; it separates signals by spectral shape and
    dynamics, which is enough to exercise the similarity pipeline offline.
    """

    model_id = "spectral-stats-v1"

    def __init__(self, n_bands: int = 24):
        self.n_bands = n_bands

    def _filterbank(self, n_fft: int, rate: int) -> np.ndarray:
        def mel(f):
            return 2595.0 * np.log10(1.0 + f / 700.0)

        def inv_mel(m):
            return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

        points = inv_mel(np.linspace(mel(0.0), mel(rate / 2.0), self.n_bands + 2))
        bins = np.floor((n_fft + 1) * points / rate).astype(int)
        bank = np.zeros((self.n_bands, n_fft // 2 + 1))
        for b in range(self.n_bands):
            lo, mid, hi = bins[b], bins[b + 1], bins[b + 2]
            mid = max(mid, lo + 1)
            hi = max(hi, mid + 1)
            bank[b, lo:mid] = np.linspace(0.0, 1.0, mid - lo, endpoint=False)
            bank[b, mid:hi] = np.linspace(1.0, 0.0, hi - mid, endpoint=False)
        return bank

    def embed(self, samples: np.ndarray, rate: int) -> np.ndarray:
        frame = max(int(0.032 * rate), 32)
        hop = max(frame // 2, 1)
        frames = _frame(samples, frame, hop)
        if frames.shape[0] == 0:
            frames = np.pad(samples, (0, frame - len(samples)))[None, :]
        window = np.hanning(frame)
        spectra = np.abs(np.fft.rfft(frames * window, axis=1)) ** 2
        bank = self._filterbank(frame, rate)
        band_energy = np.log10(np.maximum(spectra @ bank.T, 1e-12))
        vec = np.concatenate([band_energy.mean(axis=0), band_energy.std(axis=0)])
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            vec = np.zeros_like(vec)
            vec[0] = 1.0
            return vec
        return vec / norm


def _import_onnxruntime():
    try:
        import onnxruntime
    except ImportError as exc:
        raise ModelLoadError(
            "onnxruntime is not installed; install the 'onnx' extra or use "
            "the dsp backend") from exc
    return onnxruntime


class OnnxMos:
    """Pretrained MOS model: expects a waveform input and an overall score
    output on the 1-5 scale (see scripts/fetch_models.py for sources)."""

    def __init__(self, model_path: str):
        ort = _import_onnxruntime()
        try:
            self.session = ort.InferenceSession(str(model_path),
                                                providers=["CPUExecutionProvider"])
        except Exception as exc:
            raise ModelLoadError(f"cannot load MOS model {model_path}: {exc}") from exc
        inputs = self.session.get_inputs()
        if len(inputs) != 1:
            raise ModelLoadError(f"{model_path}: expected a single waveform input")
        self.input_name = inputs[0].name
        self.model_id = f"onnx-mos:{model_path}"

    def score(self, samples: np.ndarray, rate: int) -> float:
        x = samples.astype(np.float32)[None, :]
        outputs = self.session.run(None, {self.input_name: x})
        value = float(np.asarray(outputs[-1]).reshape(-1)[-1])
        return float(min(5.0, max(1.0, value)))


class OnnxEmbedder:
    """Pretrained speaker-embedding model: waveform in, vector out,
    L2-normalized here so consumers never renormalize."""

    def __init__(self, model_path: str):
        ort = _import_onnxruntime()
        try:
            self.session = ort.InferenceSession(str(model_path),
                                                providers=["CPUExecutionProvider"])
        except Exception as exc:
            raise ModelLoadError(
                f"cannot load embedding model {model_path}: {exc}") from exc
        inputs = self.session.get_inputs()
        if len(inputs) != 1:
            raise ModelLoadError(f"{model_path}: expected a single waveform input")
        self.input_name = inputs[0].name
        self.model_id = f"onnx-embedding:{model_path}"

    def embed(self, samples: np.ndarray, rate: int) -> np.ndarray:
        x = samples.astype(np.float32)[None, :]
        outputs = self.session.run(None, {self.input_name: x})
        vec = np.asarray(outputs[0], dtype=np.float64).reshape(-1)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ModelLoadError("embedding model returned a zero vector")
        return vec / norm
