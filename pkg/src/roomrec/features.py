"""Record-to-model-input feature extraction shared by service and experiments."""
from __future__ import annotations

import numpy as np

from . import dsp

PSD_LOG_FLOOR = 1e-30


def spectrogram_features(records: np.ndarray) -> np.ndarray:
    """Per-record narrowband spectrogram images, (n, 32, 5, 1)."""
    records = np.atleast_2d(records)
    grids = [dsp.spectrogram(dsp.segment_record(r)[2]) for r in records]
    return np.stack(grids)[..., None]


def psd_features(records: np.ndarray) -> np.ndarray:
    """Per-record narrowband log-PSD vectors, (n, 1, 147, 1)."""
    records = np.atleast_2d(records)
    rows = [dsp.psd_narrowband(dsp.segment_record(r)[2]).values for r in records]
    return 10.0 * np.log10(np.stack(rows) + PSD_LOG_FLOOR)[:, None, :, None]


def mfcc_features(records: np.ndarray, cfg) -> np.ndarray:
    """Per-record MFCC vectors, (n, 104)."""
    from .mfcc import mfcc

    records = np.atleast_2d(records)
    return np.stack([mfcc(dsp.segment_record(r)[2], cfg) for r in records])
