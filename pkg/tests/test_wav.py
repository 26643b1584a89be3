import io
import wave

import numpy as np
import pytest

from roomrec.errors import FormatError
from roomrec.wavio import (
    records_to_wav_bytes,
    wav_bytes_to_records,
    wav_read,
    wav_write,
)


def make_records(n=1, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, (n, 4410))


class TestRoundTrip:
    def test_single_record(self):
        rec = make_records(1)
        back = wav_bytes_to_records(records_to_wav_bytes(rec[0]))
        assert back.shape == (1, 4410)
        assert np.max(np.abs(back - rec)) <= 1.0 / 32768

    def test_batch(self):
        recs = make_records(5)
        back = wav_bytes_to_records(records_to_wav_bytes(recs))
        assert back.shape == (5, 4410)
        assert np.max(np.abs(back - recs)) <= 1.0 / 32768

    def test_extremes_survive(self):
        rec = np.zeros((1, 4410))
        rec[0, 0] = 1.0
        rec[0, 1] = -1.0
        back = wav_bytes_to_records(records_to_wav_bytes(rec))
        assert abs(back[0, 0] - 1.0) <= 1.0 / 32768
        assert abs(back[0, 1] + 1.0) <= 1.0 / 32768

    def test_file_round_trip(self, tmp_path):
        recs = make_records(3, seed=1)
        path = tmp_path / "caps.wav"
        wav_write(recs, path)
        back = wav_read(path)
        assert back.shape == (3, 4410)
        assert np.max(np.abs(back - recs)) <= 1.0 / 32768


class TestWavHeader:
    def test_format_fields(self):
        blob = records_to_wav_bytes(make_records(2))
        with wave.open(io.BytesIO(blob), "rb") as w:
            assert w.getnchannels() == 1
            assert w.getsampwidth() == 2
            assert w.getframerate() == 44100
            assert w.getnframes() == 2 * 4410


class TestRejections:
    def test_wrong_record_length(self):
        with pytest.raises(FormatError):
            records_to_wav_bytes(np.zeros(4411))

    def test_garbage_bytes(self):
        with pytest.raises(FormatError):
            wav_bytes_to_records(b"this is not audio")

    def _blob(self, channels=1, width=2, rate=44100, n_samples=4410):
        buf = io.BytesIO()
        with wave.open(buf, "wb") as w:
            w.setnchannels(channels)
            w.setsampwidth(width)
            w.setframerate(rate)
            w.writeframes(b"\x00" * (n_samples * width * channels))
        return buf.getvalue()

    def test_stereo_rejected(self):
        with pytest.raises(FormatError):
            wav_bytes_to_records(self._blob(channels=2))

    def test_wrong_width_rejected(self):
        with pytest.raises(FormatError):
            wav_bytes_to_records(self._blob(width=1))

    def test_wrong_rate_rejected(self):
        with pytest.raises(FormatError):
            wav_bytes_to_records(self._blob(rate=48000))

    def test_partial_record_rejected(self):
        with pytest.raises(FormatError):
            wav_bytes_to_records(self._blob(n_samples=4000))

    def test_empty_rejected(self):
        with pytest.raises(FormatError):
            wav_bytes_to_records(self._blob(n_samples=0))
