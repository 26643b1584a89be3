"""WAV I/O for capture records: PCM 16-bit little-endian, mono, 44.1 ksps.

A file may hold several consecutive 4410-sample records; readers split them.
"""
from __future__ import annotations

import io
import wave

import numpy as np

from .dsp import RECORD_SAMPLES, SAMPLE_RATE_HZ
from .errors import FormatError

_PCM_SCALE = 32767.0


def records_to_wav_bytes(records: np.ndarray) -> bytes:
    """Encode one record (4410,) or a batch (n, 4410) as a single WAV blob."""
    records = np.atleast_2d(np.asarray(records, dtype=np.float64))
    if records.shape[1] != RECORD_SAMPLES:
        raise FormatError(f"each record must hold {RECORD_SAMPLES} samples, got {records.shape[1]}")
    pcm = np.clip(np.round(records.ravel() * _PCM_SCALE), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(SAMPLE_RATE_HZ)
        w.writeframes(pcm.tobytes())
    return buf.getvalue()


def wav_bytes_to_records(data: bytes) -> np.ndarray:
    """Decode a WAV blob into an (n, 4410) float array in [-1, 1]."""
    try:
        with wave.open(io.BytesIO(data), "rb") as w:
            channels = w.getnchannels()
            width = w.getsampwidth()
            rate = w.getframerate()
            frames = w.readframes(w.getnframes())
    except (wave.Error, EOFError) as exc:
        raise FormatError(f"not a readable WAV stream: {exc}") from exc
    if channels != 1:
        raise FormatError(f"expected mono audio, got {channels} channels")
    if width != 2:
        raise FormatError(f"expected 16-bit PCM, got sample width {width}")
    if rate != SAMPLE_RATE_HZ:
        raise FormatError(f"expected {SAMPLE_RATE_HZ} Hz, got {rate}")
    pcm = np.frombuffer(frames, dtype="<i2").astype(np.float64) / _PCM_SCALE
    if pcm.size == 0 or pcm.size % RECORD_SAMPLES != 0:
        raise FormatError(
            f"sample count {pcm.size} is not a positive multiple of {RECORD_SAMPLES}"
        )
    return pcm.reshape(-1, RECORD_SAMPLES)


def wav_write(records: np.ndarray, path) -> None:
    with open(path, "wb") as f:
        f.write(records_to_wav_bytes(records))


def wav_read(path) -> np.ndarray:
    with open(path, "rb") as f:
        return wav_bytes_to_records(f.read())
