"""Signal-processing core: chirp synthesis, record framing, correlation,
PSD estimation, and the 32x5 narrowband spectrogram.

All functions are pure and operate on float64 numpy arrays. One capture is a
4410-sample mono record at 44.1 ksps: an 88-sample chirp, a 22-sample guard,
and a 4300-sample echo window.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, FramingError, ShapeError

SAMPLE_RATE_HZ = 44100
RECORD_SAMPLES = 4410
CHIRP_SAMPLES = 88
GUARD_SAMPLES = 22
ECHO_SAMPLES = 4300

# Narrowband PSD: the echo frame is zero-padded to this length so that the
# [19.5, 20.5] kHz band holds exactly 147 bins.
PSD_FFT_LEN = 6480
PSD_BAND_BINS = 147

SPEC_WINDOW = 256
SPEC_HOP = 128
SPEC_TIME_FRAMES = 32
SPEC_FREQ_BINS = 5
SPEC_LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class ChirpConfig:
    carrier_hz: float = 20000.0
    chirp_ms: float = 2.0
    period_ms: float = 100.0
    sample_rate_hz: int = SAMPLE_RATE_HZ
    amplitude: float = 1.0

    def __post_init__(self):
        if not (0 < self.amplitude <= 1):
            raise ConfigurationError(f"amplitude must be in (0, 1], got {self.amplitude}")
        if self.carrier_hz >= self.sample_rate_hz / 2:
            raise ConfigurationError(
                f"carrier {self.carrier_hz} Hz is at or above Nyquist "
                f"({self.sample_rate_hz / 2} Hz)"
            )
        if self.chirp_ms <= 0 or self.period_ms <= self.chirp_ms:
            raise ConfigurationError("need 0 < chirp_ms < period_ms")


@dataclass(frozen=True)
class FrameLayout:
    chirp_samples: int = CHIRP_SAMPLES
    guard_samples: int = GUARD_SAMPLES
    echo_samples: int = ECHO_SAMPLES

    def __post_init__(self):
        total = self.chirp_samples + self.guard_samples + self.echo_samples
        if total != RECORD_SAMPLES:
            raise ConfigurationError(
                f"frame parts must sum to {RECORD_SAMPLES}, got {total}"
            )


@dataclass(frozen=True)
class BandSelection:
    low_hz: float = 19500.0
    high_hz: float = 20500.0

    def __post_init__(self):
        if not self.low_hz < self.high_hz:
            raise ConfigurationError("band low edge must be below high edge")


def gen_chirp(cfg: ChirpConfig = ChirpConfig()) -> np.ndarray:
    """Single-tone sine burst: amplitude * sin(2*pi*f*n/fs) for the chirp duration."""
    n = int(cfg.chirp_ms / 1000.0 * cfg.sample_rate_hz)
    t = np.arange(n, dtype=np.float64)
    return cfg.amplitude * np.sin(2.0 * np.pi * cfg.carrier_hz * t / cfg.sample_rate_hz)


def validate_record(samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.shape[0] != RECORD_SAMPLES:
        raise FramingError(f"record must hold exactly {RECORD_SAMPLES} samples, got shape {samples.shape}")
    if not np.all(np.isfinite(samples)):
        raise FramingError("record contains non-finite samples")
    return samples


def segment_record(record: np.ndarray, layout: FrameLayout = FrameLayout()):
    """Split a 4410-sample record into (chirp, guard, echo) contiguous parts."""
    record = validate_record(record)
    a = layout.chirp_samples
    b = a + layout.guard_samples
    return record[:a], record[a:b], record[b:]


def _validate_echo_frame(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 1 or frame.shape[0] != ECHO_SAMPLES:
        raise FramingError(f"echo frame must hold exactly {ECHO_SAMPLES} samples, got shape {frame.shape}")
    return frame


def sliding_correlation(frame: np.ndarray, template_hz: float = 20000.0,
                        window_samples: int = CHIRP_SAMPLES,
                        sample_rate_hz: int = SAMPLE_RATE_HZ) -> np.ndarray:
    """Normalized correlation of every stride-1 window against an ideal sine.

    Values are cosine similarities in [-1, 1]; a zero-energy window maps to 0.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if window_samples > frame.shape[0]:
        raise ShapeError("correlation window longer than frame")
    t = np.arange(window_samples, dtype=np.float64)
    template = np.sin(2.0 * np.pi * template_hz * t / sample_rate_hz)
    tnorm = np.linalg.norm(template)

    n_out = frame.shape[0] - window_samples + 1
    windows = np.lib.stride_tricks.sliding_window_view(frame, window_samples)
    dots = windows @ template
    norms = np.sqrt(np.einsum("ij,ij->i", windows, windows))
    out = np.zeros(n_out)
    nz = norms > 0
    out[nz] = dots[nz] / (norms[nz] * tnorm)
    return np.clip(out, -1.0, 1.0)


def fft(x: np.ndarray) -> np.ndarray:
    """DFT of a real or complex sequence (any length >= 1)."""
    x = np.asarray(x)
    if x.size == 0:
        raise ShapeError("fft input is empty")
    return np.fft.fft(x)


def long_psd(frames, sample_rate_hz: int = SAMPLE_RATE_HZ):
    """High-resolution PSD from 40 concatenated echo frames (172,000 points).

    Returns (freqs_hz, psd) for the non-negative half spectrum; bin spacing is
    fs/172000 ~ 0.2564 Hz. Periodogram scaling: |X|^2 / (fs * N).
    """
    frames = [_validate_echo_frame(f) for f in frames]
    if len(frames) != 40:
        raise ShapeError(f"long_psd needs exactly 40 echo frames, got {len(frames)}")
    x = np.concatenate(frames)
    n = x.shape[0]
    spec = np.fft.rfft(x)
    psd = (np.abs(spec) ** 2) / (sample_rate_hz * n)
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate_hz)
    return freqs, psd


@dataclass(frozen=True)
class PsdSegment:
    values: np.ndarray
    bin_hz: np.ndarray

    def __post_init__(self):
        if self.values.shape != (PSD_BAND_BINS,) or self.bin_hz.shape != (PSD_BAND_BINS,):
            raise ShapeError(f"PSD segment must hold exactly {PSD_BAND_BINS} bins")
        if np.any(self.values < 0):
            raise ShapeError("PSD values must be non-negative")
        if np.any(np.diff(self.bin_hz) <= 0):
            raise ShapeError("PSD bin frequencies must be strictly increasing")


def psd_narrowband(frame: np.ndarray, band: BandSelection = BandSelection(),
                   sample_rate_hz: int = SAMPLE_RATE_HZ) -> PsdSegment:
    """Short-time PSD of one echo frame, restricted to the narrow band.

    The 4300-sample frame is zero-padded to 6480 points so the default
    [19.5, 20.5] kHz band contains exactly 147 bins (2866..3012).
    """
    frame = _validate_echo_frame(frame)
    spec = np.fft.rfft(frame, n=PSD_FFT_LEN)
    psd = (np.abs(spec) ** 2) / (sample_rate_hz * PSD_FFT_LEN)
    freqs = np.fft.rfftfreq(PSD_FFT_LEN, d=1.0 / sample_rate_hz)
    mask = (freqs >= band.low_hz) & (freqs <= band.high_hz)
    return PsdSegment(values=psd[mask], bin_hz=freqs[mask])


def hann_window(n: int = SPEC_WINDOW) -> np.ndarray:
    """Periodic Hann window: 0.5 * (1 - cos(2*pi*k/n))."""
    k = np.arange(n, dtype=np.float64)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * k / n))


def _band_bin_range(band: BandSelection, n_fft: int, sample_rate_hz: int):
    # Keep only bins whose full extent [center - df/2, center + df/2] lies
    # inside the band; for the defaults this selects k = 114..118.
    df = sample_rate_hz / n_fft
    k = np.arange(n_fft // 2 + 1)
    centers = k * df
    mask = (centers - df / 2.0 >= band.low_hz) & (centers + df / 2.0 <= band.high_hz)
    return k[mask]


def spectrogram(frame: np.ndarray, band: BandSelection = BandSelection(),
                sample_rate_hz: int = SAMPLE_RATE_HZ) -> np.ndarray:
    """32 (time) x 5 (frequency) log-power spectrogram of one echo frame.

    256-point periodic Hann windows with hop 128; entries are
    10*log10(|X|^2 + 1e-12) over the in-band bins.
    """
    frame = _validate_echo_frame(frame)
    window = hann_window(SPEC_WINDOW)
    bins = _band_bin_range(band, SPEC_WINDOW, sample_rate_hz)
    n_frames = (frame.shape[0] - SPEC_WINDOW) // SPEC_HOP + 1
    starts = np.arange(n_frames) * SPEC_HOP
    blocks = np.lib.stride_tricks.sliding_window_view(frame, SPEC_WINDOW)[starts]
    spec = np.fft.rfft(blocks * window, axis=1)[:, bins]
    power = np.abs(spec) ** 2
    return 10.0 * np.log10(power + SPEC_LOG_FLOOR)


def spectrogram_csv(grid: np.ndarray, band: BandSelection = BandSelection(),
                    sample_rate_hz: int = SAMPLE_RATE_HZ) -> str:
    """CSV export with header t_index,f_hz,value."""
    bins = _band_bin_range(band, SPEC_WINDOW, sample_rate_hz)
    df = sample_rate_hz / SPEC_WINDOW
    lines = ["t_index,f_hz,value"]
    for t in range(grid.shape[0]):
        for j, k in enumerate(bins):
            lines.append(f"{t},{k * df:.6f},{grid[t, j]:.6f}")
    return "\n".join(lines) + "\n"


def psd_csv(seg: PsdSegment) -> str:
    """CSV export with header f_hz,value."""
    lines = ["f_hz,value"]
    for f, v in zip(seg.bin_hz, seg.values):
        lines.append(f"{f:.6f},{v:.12e}")
    return "\n".join(lines) + "\n"
