"""Scorer sidecar for voxgauge: writes the score-file contract out of process."""

from .scorers import DspMosProxy, ModelLoadError, OnnxEmbedder, OnnxMos, SpectralEmbedder
from .sidecar import SidecarConfig, build_scorers, resolve_clips, score_clips

__version__ = "0.1.0"

__all__ = [
    "DspMosProxy",
    "ModelLoadError",
    "OnnxEmbedder",
    "OnnxMos",
    "SidecarConfig",
    "SpectralEmbedder",
    "build_scorers",
    "resolve_clips",
    "score_clips",
]
