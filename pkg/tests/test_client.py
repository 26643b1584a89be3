import socket
import threading
import time
from pathlib import Path

import numpy as np
import pytest

from roomrec import client as cli
from roomrec.errors import CaptureError
from roomrec.service import ServiceConfig, create_app
from roomrec.sim import CaptureContext, default_profiles, synth_corpus
from roomrec.wavio import wav_read, wav_write


def profile_file(tmp_path, room, name="room.json"):
    path = tmp_path / name
    path.write_text(room.to_json())
    return path


class TestEmitRecord:
    def test_training_mode_yields_500(self, tmp_path):
        room = default_profiles(1, master_seed=5)[0]
        records = cli.emit_record("training", f"sim:{profile_file(tmp_path, room)}")
        assert records.shape == (500, 4410)

    def test_recognition_mode_yields_1(self, tmp_path):
        room = default_profiles(1, master_seed=5)[0]
        records = cli.emit_record("recognition", f"sim:{profile_file(tmp_path, room)}")
        assert records.shape == (1, 4410)

    def test_sim_source_deterministic_per_seed(self, tmp_path):
        room = default_profiles(1, master_seed=6)[0]
        src = f"sim:{profile_file(tmp_path, room)}"
        r1 = cli.emit_record("recognition", src, seed=3)
        r2 = cli.emit_record("recognition", src, seed=3)
        r3 = cli.emit_record("recognition", src, seed=4)
        assert np.array_equal(r1, r2)
        assert not np.array_equal(r1, r3)

    def test_file_source(self, tmp_path):
        room = default_profiles(1, master_seed=7)[0]
        records = cli.emit_record("recognition", f"sim:{profile_file(tmp_path, room)}")
        path = tmp_path / "cap.wav"
        wav_write(records, path)
        back = cli.emit_record("recognition", f"file:{path}")
        assert np.max(np.abs(back - records)) <= 1.0 / 32768

    def test_file_source_too_short(self, tmp_path):
        room = default_profiles(1, master_seed=8)[0]
        records = cli.emit_record("recognition", f"sim:{profile_file(tmp_path, room)}")
        path = tmp_path / "cap.wav"
        wav_write(records, path)
        with pytest.raises(CaptureError):
            cli.emit_record("training", f"file:{path}")

    def test_device_unavailable(self):
        with pytest.raises(CaptureError):
            cli.emit_record("recognition", "device")

    def test_unknown_source(self):
        with pytest.raises(CaptureError):
            cli.emit_record("recognition", "telepathy:room")

    def test_bad_profile_path(self):
        with pytest.raises(CaptureError):
            cli.emit_record("recognition", "sim:/does/not/exist.json")


class TestExitCodes:
    def test_usage_error_is_2(self):
        assert cli.main(["emit-record", "--mode", "sideways"]) == 2

    def test_capture_error_is_3(self, tmp_path):
        out = tmp_path / "o.wav"
        assert cli.main(["emit-record", "--mode", "recognition",
                         "--source", "device", "--out", str(out)]) == 3

    def test_transport_error_is_4(self, tmp_path):
        room = default_profiles(1, master_seed=9)[0]
        out = tmp_path / "o.wav"
        assert cli.main(["emit-record", "--mode", "recognition",
                         "--source", f"sim:{profile_file(tmp_path, room)}",
                         "--out", str(out)]) == 0
        assert cli.main(["upload", "--mode", "recognition", "--in", str(out),
                         "--server", "http://127.0.0.1:1"]) == 4


@pytest.fixture(scope="module")
def live_server(tmp_path_factory):
    import uvicorn

    tmp = tmp_path_factory.mktemp("server")
    cfg = ServiceConfig(
        data_dir=str(tmp / "data"),
        model_path=str(tmp / "data" / "model.rrm"),
        arch="C",
        train_max_steps=60,
        train_eval_every=20,
        train_patience=2,
        train_batch=32,
        train_lr=0.005,
    )
    app = create_app(cfg)
    # pre-seed one room so the first client-contributed label yields 2 classes
    rooms = default_profiles(2, master_seed=31)
    recs, _ = synth_corpus([rooms[0]], 40, CaptureContext(), master_seed=3)
    app.state.runtime.store.ingest(recs, [rooms[0].room_id] * len(recs))

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port,
                                           log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 20
    while not server.started and time.time() < deadline:
        time.sleep(0.05)
    assert server.started
    yield f"http://127.0.0.1:{port}", app.state.runtime, rooms
    server.should_exit = True
    thread.join(timeout=10)


class TestFullLoop:
    def test_capture_upload_label_retrain_recognize(self, tmp_path, live_server, capsys):
        url, runtime, rooms = live_server
        new_room = rooms[1]
        src = f"sim:{profile_file(tmp_path, new_room)}"

        train_wav = tmp_path / "training.wav"
        assert cli.main(["emit-record", "--mode", "training", "--source", src,
                         "--out", str(train_wav)]) == 0
        assert wav_read(train_wav).shape == (500, 4410)

        assert cli.main(["upload", "--mode", "training", "--in", str(train_wav),
                         "--server", url]) == 0
        out = capsys.readouterr().out
        session_id = next(l.split(": ")[1] for l in out.splitlines()
                          if l.startswith("session:"))

        assert cli.main(["label", "--session", session_id, "--label",
                         new_room.room_id, "--watch", "--server", url]) == 0
        out = capsys.readouterr().out
        assert "task state: done" in out

        rec_wav = tmp_path / "probe.wav"
        assert cli.main(["emit-record", "--mode", "recognition", "--source", src,
                         "--out", str(rec_wav), "--seed", "99"]) == 0
        assert cli.main(["upload", "--mode", "recognition", "--in", str(rec_wav),
                         "--server", url]) == 0
        out = capsys.readouterr().out
        assert f"label: {new_room.room_id}" in out

    def test_label_unknown_session_is_5(self, live_server):
        url, _, _ = live_server
        assert cli.main(["label", "--session", "bogus", "--label", "x",
                         "--server", url]) == 5
