"""MFCC features over a configurable band, for the SVM baselines.

The 4300-sample echo window is cut into 25 ms frames with a 10 ms hop
(8 frames), each frame goes through a 2048-point power spectrum, a mel
filterbank restricted to [low_hz, high_hz], log compression, and a DCT-II;
the first 13 cepstra per frame are concatenated (8 x 13 = 104 values).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fftpack import dct

from .dsp import SAMPLE_RATE_HZ
from .errors import ConfigurationError

LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class MfccConfig:
    low_hz: float = 0.0
    high_hz: float = 22050.0
    num_filters: int = 26
    num_ceps: int = 13
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    fft_len: int = 2048
    sample_rate_hz: int = SAMPLE_RATE_HZ

    def __post_init__(self):
        if not (0 <= self.low_hz < self.high_hz <= self.sample_rate_hz / 2):
            raise ConfigurationError(
                f"band [{self.low_hz}, {self.high_hz}] must lie within "
                f"[0, {self.sample_rate_hz / 2}]"
            )
        if self.num_ceps > self.num_filters:
            raise ConfigurationError("num_ceps cannot exceed num_filters")


BROADBAND = MfccConfig()
NARROWBAND = MfccConfig(low_hz=19500.0, high_hz=20500.0)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg: MfccConfig) -> np.ndarray:
    """Triangular filters, (num_filters, fft_len//2 + 1)."""
    edges_mel = np.linspace(hz_to_mel(cfg.low_hz), hz_to_mel(cfg.high_hz),
                            cfg.num_filters + 2)
    edge_bins = mel_to_hz(edges_mel) * cfg.fft_len / cfg.sample_rate_hz
    fb = np.zeros((cfg.num_filters, cfg.fft_len // 2 + 1))
    for m in range(cfg.num_filters):
        left, center, right = edge_bins[m], edge_bins[m + 1], edge_bins[m + 2]
        for k in range(int(np.floor(left)), int(np.ceil(right)) + 1):
            if k >= fb.shape[1]:
                break
            if left <= k < center and center > left:
                fb[m, k] = (k - left) / (center - left)
            elif center <= k <= right and right > center:
                fb[m, k] = (right - k) / (right - center)
    return fb


def frame_signal(x: np.ndarray, cfg: MfccConfig) -> np.ndarray:
    frame_len = int(cfg.frame_ms * cfg.sample_rate_hz / 1000.0)
    hop = int(cfg.hop_ms * cfg.sample_rate_hz / 1000.0)
    n_frames = (len(x) - frame_len) // hop + 1
    if n_frames < 1:
        raise ConfigurationError("signal shorter than one analysis frame")
    starts = np.arange(n_frames) * hop
    return np.lib.stride_tricks.sliding_window_view(x, frame_len)[starts]


def mfcc(frame: np.ndarray, cfg: MfccConfig = BROADBAND) -> np.ndarray:
    """Concatenated per-frame cepstra of one echo window."""
    frames = frame_signal(np.asarray(frame, dtype=np.float64), cfg)
    power = np.abs(np.fft.rfft(frames, n=cfg.fft_len, axis=1)) ** 2 / cfg.fft_len
    energies = power @ mel_filterbank(cfg).T
    logs = np.log(np.maximum(energies, LOG_FLOOR))
    ceps = dct(logs, type=2, axis=1, norm="ortho")[:, :cfg.num_ceps]
    return ceps.ravel()
