import numpy as np
import pytest

from roomrec import dsp
from roomrec.errors import ConfigurationError, FramingError, ShapeError


def naive_dft(x):
    x = np.asarray(x, dtype=complex)
    n = len(x)
    k = np.arange(n)
    return np.array([np.sum(x * np.exp(-2j * np.pi * k * m / n)) for m in range(n)])


def sine_frame(freq=20000.0, n=dsp.ECHO_SAMPLES, amp=1.0):
    t = np.arange(n) / dsp.SAMPLE_RATE_HZ
    return amp * np.sin(2 * np.pi * freq * t)


class TestGenChirp:
    def test_sample_count(self):
        assert len(dsp.gen_chirp(dsp.ChirpConfig())) == 88

    def test_first_sample_zero(self):
        assert dsp.gen_chirp(dsp.ChirpConfig())[0] == 0.0

    def test_matches_sine_formula(self):
        cfg = dsp.ChirpConfig(amplitude=0.7)
        chirp = dsp.gen_chirp(cfg)
        for n, v in enumerate(chirp):
            expected = 0.7 * np.sin(2 * np.pi * 20000 * n / 44100)
            assert abs(v - expected) < 1e-12

    def test_carrier_above_nyquist_rejected(self):
        with pytest.raises(ConfigurationError):
            dsp.ChirpConfig(carrier_hz=23000.0)


class TestSegmentRecord:
    def test_slice_boundaries(self):
        rec = np.arange(4410, dtype=float) / 4410
        chirp, guard, echo = dsp.segment_record(rec)
        assert np.array_equal(chirp, rec[0:88])
        assert np.array_equal(guard, rec[88:110])
        assert np.array_equal(echo, rec[110:4410])

    def test_echo_length(self):
        _, _, echo = dsp.segment_record(np.zeros(4410))
        assert len(echo) == 4300

    def test_partition_covers_record(self):
        parts = dsp.segment_record(np.ones(4410))
        assert sum(len(p) for p in parts) == 4410

    def test_wrong_length_rejected(self):
        with pytest.raises(FramingError):
            dsp.segment_record(np.zeros(4409))


class TestSlidingCorrelation:
    def test_pure_tone_high_correlation(self):
        corr = dsp.sliding_correlation(sine_frame())
        assert len(corr) == 4213
        assert np.max(np.abs(corr)) >= 0.99

    def test_zero_frame_all_zero(self):
        assert np.all(dsp.sliding_correlation(np.zeros(4300)) == 0)

    def test_seeded_noise_low_correlation(self):
        rng = np.random.default_rng(42)
        corr = dsp.sliding_correlation(rng.normal(size=4300))
        assert np.max(np.abs(corr)) < 0.5

    def test_bounded(self):
        rng = np.random.default_rng(3)
        frame = rng.uniform(-1, 1, 4300) * 10
        corr = dsp.sliding_correlation(frame)
        assert np.all(corr >= -1) and np.all(corr <= 1)

    def test_window_longer_than_frame_rejected(self):
        with pytest.raises(ShapeError):
            dsp.sliding_correlation(np.zeros(4300), window_samples=4301)


class TestFft:
    def test_impulse(self):
        assert np.allclose(dsp.fft([1, 0, 0, 0]), np.ones(4))

    def test_matches_naive_dft(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=256)
        assert np.max(np.abs(dsp.fft(x) - naive_dft(x))) < 1e-9

    @pytest.mark.parametrize("n", [1, 2, 3, 7, 64, 100, 147, 1024])
    def test_matches_naive_dft_many_lengths(self, n):
        rng = np.random.default_rng(n)
        x = rng.normal(size=n)
        assert np.max(np.abs(dsp.fft(x) - naive_dft(x))) < 1e-9

    def test_parseval(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=300)
        spec = dsp.fft(x)
        lhs = np.sum(np.abs(x) ** 2)
        rhs = np.sum(np.abs(spec) ** 2) / len(x)
        assert abs(lhs - rhs) / lhs < 1e-9

    def test_empty_rejected(self):
        with pytest.raises(ShapeError):
            dsp.fft([])


class TestLongPsd:
    def test_bin_spacing(self):
        freqs, _ = dsp.long_psd([np.zeros(4300)] * 40)
        assert abs((freqs[1] - freqs[0]) - 44100 / 172000) < 1e-6
        assert abs((freqs[1] - freqs[0]) - 0.2564) < 1e-4

    def test_zero_frames_zero_psd(self):
        _, psd = dsp.long_psd([np.zeros(4300)] * 40)
        assert np.all(psd == 0)

    def test_wrong_count_rejected(self):
        with pytest.raises(ShapeError):
            dsp.long_psd([np.zeros(4300)] * 39)


class TestPsdNarrowband:
    def test_bin_count(self):
        rng = np.random.default_rng(5)
        seg = dsp.psd_narrowband(rng.normal(size=4300))
        assert len(seg.values) == 147

    def test_zero_frame(self):
        seg = dsp.psd_narrowband(np.zeros(4300))
        assert np.all(seg.values == 0)

    def test_tone_peak_location(self):
        seg = dsp.psd_narrowband(sine_frame(20000.0))
        peak_hz = seg.bin_hz[np.argmax(seg.values)]
        bin_width = 44100 / 6480
        assert abs(peak_hz - 20000.0) <= bin_width

    def test_band_edges(self):
        seg = dsp.psd_narrowband(np.zeros(4300))
        assert seg.bin_hz[0] >= 19500.0
        assert seg.bin_hz[-1] <= 20500.0


class TestSpectrogram:
    def test_shape(self):
        rng = np.random.default_rng(6)
        assert dsp.spectrogram(rng.normal(size=4300)).shape == (32, 5)

    def test_frame_count_formula(self):
        assert (4300 - 256) // 128 + 1 == 32

    def test_zero_frame_at_floor(self):
        grid = dsp.spectrogram(np.zeros(4300))
        assert np.allclose(grid, -120.0)

    def test_scaling_shifts_log_power(self):
        frame = sine_frame(20000.0, amp=0.5)
        base = dsp.spectrogram(frame)
        scaled = dsp.spectrogram(4.0 * frame)
        strong = base > -60  # well above the floor
        assert strong.any()
        shift = scaled[strong] - base[strong]
        assert np.allclose(shift, 10 * np.log10(16.0), atol=1e-6)

    def test_pure_ops(self):
        rng = np.random.default_rng(7)
        frame = rng.normal(size=4300)
        assert np.array_equal(dsp.spectrogram(frame), dsp.spectrogram(frame))
        seg1, seg2 = dsp.psd_narrowband(frame), dsp.psd_narrowband(frame)
        assert np.array_equal(seg1.values, seg2.values)


class TestCsvExport:
    def test_spectrogram_csv_header_and_size(self):
        grid = dsp.spectrogram(np.zeros(4300))
        lines = dsp.spectrogram_csv(grid).strip().split("\n")
        assert lines[0] == "t_index,f_hz,value"
        assert len(lines) == 1 + 32 * 5

    def test_psd_csv(self):
        seg = dsp.psd_narrowband(np.zeros(4300))
        lines = dsp.psd_csv(seg).strip().split("\n")
        assert lines[0] == "f_hz,value"
        assert len(lines) == 148
