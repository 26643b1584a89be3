"""Synthetic per-room echo generator.

Each room is a sparse tapped-delay line: the chirp excites a handful of
reflection paths, each returning a delayed, resonance-shaped wave packet near
20 kHz. The speaker's damped ringing, capture jitter, microphone noise, and an
optional "music" interferer are layered on top. Everything is seeded, so a
corpus is a pure function of (profiles, context, master seed).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .dsp import (
    CHIRP_SAMPLES,
    ECHO_SAMPLES,
    RECORD_SAMPLES,
    SAMPLE_RATE_HZ,
    ChirpConfig,
    gen_chirp,
)
from .errors import ConfigurationError

CHIRP_AMPLITUDE = 0.8
CARRIER_HZ = 20000.0


@dataclass(frozen=True)
class RoomProfile:
    """Acoustic fingerprint of one synthetic room."""

    room_id: str
    path_delays_ms: tuple[float, ...]
    path_gains: tuple[float, ...]
    resonance_peaks_hz: tuple[float, ...]
    resonance_qs: tuple[float, ...]
    peak_weights: tuple[float, ...]
    absorption: float
    seed: int

    def __post_init__(self):
        if len(self.path_delays_ms) < 3:
            raise ConfigurationError("a room needs at least 3 reflection paths")
        if len(self.path_delays_ms) != len(self.path_gains):
            raise ConfigurationError("path delays and gains must pair up")
        if any(d2 <= d1 for d1, d2 in zip(self.path_delays_ms, self.path_delays_ms[1:])):
            raise ConfigurationError("path delays must be strictly increasing")
        if not all(3.0 < d < 90.0 for d in self.path_delays_ms):
            raise ConfigurationError("path delays must lie in (3, 90) ms")
        if not all(0 < g <= 0.05 for g in self.path_gains):
            raise ConfigurationError("path gains must lie in (0, 0.05]")
        if not (2 <= len(self.resonance_peaks_hz) <= 4):
            raise ConfigurationError("need 2 to 4 resonance peaks")
        if len(self.resonance_peaks_hz) != len(self.resonance_qs) or len(
            self.resonance_peaks_hz
        ) != len(self.peak_weights):
            raise ConfigurationError("peaks, Qs, and weights must pair up")
        if not (0 < self.absorption < 1):
            raise ConfigurationError("absorption must lie in (0, 1)")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RoomProfile":
        doc = json.loads(text)
        for key in ("path_delays_ms", "path_gains", "resonance_peaks_hz",
                    "resonance_qs", "peak_weights"):
            doc[key] = tuple(doc[key])
        return cls(**doc)


@dataclass(frozen=True)
class Interferer:
    """Seeded multi-sine surrogate for ambient music.

    Tone amplitudes roll off as 1/f (music-like pink slope); `inband_level`
    optionally adds weak components inside [19.5, 20.5] kHz.
    """

    top_hz: float = 19000.0
    level: float = 0.05
    inband_level: float = 0.0
    n_tones: int = 12

    def __post_init__(self):
        if self.top_hz >= SAMPLE_RATE_HZ / 2:
            raise ConfigurationError("interferer band must stay below Nyquist")


@dataclass(frozen=True)
class CaptureContext:
    """Per-capture conditions shared by a synthesis run.

    spot_jitter scales both the per-path delay perturbation (std in ms) and
    the relative gain perturbation (0.1 per unit); a common trigger jitter of
    the same scale shifts all paths of a record together.
    """

    spot_jitter: float = 1.0
    ringing_ms: float = 10.0
    snr_db: float = 30.0
    interferer: Interferer | None = None

    def __post_init__(self):
        if not self.ringing_ms < 97.5:
            raise ConfigurationError("ringing must die out within the echo window")
        if math.isnan(self.snr_db):
            raise ConfigurationError("snr_db must not be NaN")


def _echo_packet(out: np.ndarray, start: int, gain: float, freq: float,
                 q: float, phase: float) -> None:
    tau = q / (math.pi * freq)
    length = min(out.shape[0] - start, int(6.0 * tau * SAMPLE_RATE_HZ) + 64)
    if length <= 0:
        return
    t = np.arange(length) / SAMPLE_RATE_HZ
    env = np.exp(-t / tau) * (1.0 - np.exp(-t / 2e-4))
    out[start:start + length] += gain * env * np.sin(2.0 * math.pi * freq * t + phase)


def synth_record(room: RoomProfile, ctx: CaptureContext,
                 rng: np.random.Generator) -> np.ndarray:
    """One 4410-sample capture of `room` under `ctx`, driven by `rng`."""
    rec = np.zeros(RECORD_SAMPLES)
    rec[:CHIRP_SAMPLES] = gen_chirp(ChirpConfig(amplitude=CHIRP_AMPLITUDE))

    # Speaker/microphone ringing continues the 20 kHz tone with decay chosen
    # so the tail is negligible (e^-6) after ctx.ringing_ms.
    tau_ring = ctx.ringing_ms / 1000.0 / 6.0
    n_tail = np.arange(CHIRP_SAMPLES, RECORD_SAMPLES)
    t_tail = (n_tail - CHIRP_SAMPLES) / SAMPLE_RATE_HZ
    rec[CHIRP_SAMPLES:] += (
        CHIRP_AMPLITUDE
        * np.exp(-t_tail / tau_ring)
        * np.sin(2.0 * math.pi * CARRIER_HZ * n_tail / SAMPLE_RATE_HZ)
    )

    # One capture-trigger offset shifts all paths together (phone timing);
    # per-path wobble is much smaller but still decorrelates the 20 kHz
    # carrier phase between paths from record to record.
    trigger_shift = rng.uniform(-3.0 * ctx.spot_jitter, 3.0 * ctx.spot_jitter)
    attenuation = 1.0 - room.absorption
    for delay_ms, gain in zip(room.path_delays_ms, room.path_gains):
        d = delay_ms + trigger_shift + rng.normal(0.0, 0.05 * ctx.spot_jitter)
        g = gain * attenuation * max(0.0, 1.0 + rng.normal(0.0, 0.06 * ctx.spot_jitter))
        start = int(round(d / 1000.0 * SAMPLE_RATE_HZ))
        if start < CHIRP_SAMPLES or start >= RECORD_SAMPLES:
            continue
        for freq, q, weight in zip(room.resonance_peaks_hz, room.resonance_qs,
                                   room.peak_weights):
            w = weight * max(0.0, 1.0 + rng.normal(0.0, 0.08 * ctx.spot_jitter))
            phase = rng.uniform(0.0, 2.0 * math.pi)
            _echo_packet(rec, start, g * w, freq, q, phase)

    if math.isfinite(ctx.snr_db):
        echo_rms = float(np.sqrt(np.mean(rec[RECORD_SAMPLES - ECHO_SAMPLES:] ** 2)))
        sigma = max(echo_rms, 1e-6) * 10.0 ** (-ctx.snr_db / 20.0)
        rec += rng.normal(0.0, sigma, RECORD_SAMPLES)

    # Interferer randomness is drawn last so that the same seed with and
    # without an interferer produces the same underlying room response.
    if ctx.interferer is not None:
        rec += _interferer_track(ctx.interferer, rng)

    return np.clip(rec, -1.0, 1.0)


def _interferer_track(cfg: Interferer, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(RECORD_SAMPLES) / SAMPLE_RATE_HZ
    track = np.zeros(RECORD_SAMPLES)
    freqs = rng.uniform(100.0, cfg.top_hz, cfg.n_tones)
    for f in freqs:
        amp = cfg.level * min(1.0, 500.0 / f)
        track += amp * np.sin(2.0 * math.pi * f * t + rng.uniform(0.0, 2.0 * math.pi))
    if cfg.inband_level > 0:
        for f in rng.uniform(19500.0, 20500.0, 3):
            track += cfg.inband_level * np.sin(
                2.0 * math.pi * f * t + rng.uniform(0.0, 2.0 * math.pi)
            )
    return track


def record_rng(master_seed: int, room_seed: int, record_index: int) -> np.random.Generator:
    """Independent per-record RNG stream, stable under parallel generation."""
    return np.random.default_rng([master_seed, room_seed, record_index])


def synth_corpus(rooms: list[RoomProfile], per_room: int, ctx: CaptureContext,
                 master_seed: int = 0):
    """Generate `per_room` records per room.

    Returns (records, labels): an (n, 4410) array and the matching room_id list.
    """
    if per_room < 1:
        raise ConfigurationError("per_room must be at least 1")
    ids = [r.room_id for r in rooms]
    if len(set(ids)) != len(ids):
        raise ConfigurationError("duplicate room_id in profile list")
    records = np.empty((len(rooms) * per_room, RECORD_SAMPLES))
    labels: list[str] = []
    row = 0
    for room in rooms:
        for i in range(per_room):
            records[row] = synth_record(room, ctx, record_rng(master_seed, room.seed, i))
            labels.append(room.room_id)
            row += 1
    return records, labels


def _delay_grid(delays, dilate: bool = False) -> np.ndarray:
    """1 ms binary grid of path positions; dilation adds +/-1 ms tolerance."""
    grid = np.zeros(96)
    for d in delays:
        grid[int(round(d))] = 1.0
    if dilate:
        grid = np.minimum(grid + np.roll(grid, 1) + np.roll(grid, -1), 1.0)
    return grid


def _max_aligned_overlap(delays, others) -> int:
    """Most paths of `delays` that coincide (within 1 ms) with a prior room's
    paths under the best time shift: trigger jitter makes absolute position
    meaningless, so similarity must be judged shift-invariantly."""
    grid = _delay_grid(delays)
    best = 0
    for other in others:
        best = max(best, int(np.correlate(grid, other, mode="full").max()))
    return best


def default_profiles(n_rooms: int, master_seed: int = 7) -> list[RoomProfile]:
    """A family of distinct, recognizable room profiles.

    Room identity lives in the pattern of gaps between reflection paths;
    resonance peaks are shared across rooms (with per-room Qs and weights in
    narrow ranges) so narrowband spectral fine structure alone says little
    about which room produced a record. Candidate patterns too alignable
    with an earlier room's pattern are rejected so rooms stay separable.
    """
    rng = np.random.default_rng(master_seed)
    shared_peaks = (19750.0, 20000.0, 20250.0)
    profiles = []
    signatures: list[np.ndarray] = []
    for i in range(n_rooms):
        n_gaps = int(rng.integers(4, 7))
        max_shared = n_gaps - 2
        for attempt in range(1000):
            gaps = rng.uniform(4.5, 15.0, n_gaps)
            delays = 16.0 + np.concatenate([[0.0], np.cumsum(gaps)])
            if delays[-1] > 72.0:
                continue
            if _max_aligned_overlap(delays, signatures) <= max_shared:
                break
            if attempt % 100 == 99:  # relax if the space is crowded
                max_shared += 1
        signatures.append(_delay_grid(delays, dilate=True))
        g0 = rng.uniform(0.025, 0.04)
        ratio = rng.uniform(0.75, 0.9)
        gains = g0 * ratio ** np.arange(len(delays))
        qs = rng.uniform(150.0, 250.0, len(shared_peaks))
        weights = rng.uniform(0.5, 0.8, len(shared_peaks))
        profiles.append(
            RoomProfile(
                room_id=f"room-{i:02d}",
                path_delays_ms=tuple(float(d) for d in delays),
                path_gains=tuple(float(g) for g in gains),
                resonance_peaks_hz=shared_peaks,
                resonance_qs=tuple(float(q) for q in qs),
                peak_weights=tuple(float(w) for w in weights),
                absorption=float(rng.uniform(0.15, 0.35)),
                seed=int(rng.integers(0, 2**31 - 1)),
            )
        )
    return profiles
