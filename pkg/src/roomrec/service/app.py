"""HTTP recognition service with a background training worker.

Recognition always runs against an immutable model snapshot; a single worker
thread consumes a FIFO queue of training tasks and publishes each finished
model by atomic reference swap, so recognition never blocks on training.
"""
from __future__ import annotations

import argparse
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import FormatError, RoomrecError
from ..features import spectrogram_features
from ..nn.arch import build_named_arch
from ..nn.model import ModelBundle, load_model, predict_topk, save_model
from ..nn.train import TrainConfig, confusion_matrix, evaluate, train
from ..store import DatasetStore
from ..wavio import wav_bytes_to_records
from .config import ServiceConfig, load_config


@dataclass
class Session:
    session_id: str
    records: np.ndarray
    candidates: list
    state: str = "awaiting_label"  # awaiting_label | labeled | merged
    created_at: float = field(default_factory=time.time)


@dataclass
class TrainTask:
    task_id: str
    label: str
    state: str = "queued"  # queued | running | done | failed
    started_at: float | None = None
    finished_at: float | None = None
    model_version: int | None = None
    metrics: dict | None = None
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "label": self.label,
            "state": self.state,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "model_version": self.model_version,
            "metrics": self.metrics,
            "error": self.error,
        }


class Runtime:
    """Shared service state: dataset store, model snapshot, sessions, tasks."""

    def __init__(self, cfg: ServiceConfig):
        self.cfg = cfg
        self.store = DatasetStore(cfg.data_dir)
        self._swap_lock = threading.Lock()
        self._bundle: ModelBundle | None = None
        model_file = Path(cfg.model_path)
        if model_file.exists():
            self._bundle = load_model(model_file)
        self.sessions: dict[str, Session] = {}
        self.tasks: dict[str, TrainTask] = {}
        self.metrics: dict | None = None
        self._queue: queue.Queue[str] = queue.Queue()
        self._state_lock = threading.Lock()
        self._worker = threading.Thread(target=self._work_loop, daemon=True)
        self._worker.start()

    @property
    def bundle(self) -> ModelBundle | None:
        return self._bundle  # reference read is atomic

    def _publish(self, bundle: ModelBundle) -> None:
        with self._swap_lock:
            self._bundle = bundle
            save_model(bundle, self.cfg.model_path)

    def purge_sessions(self) -> None:
        deadline = time.time() - self.cfg.session_ttl_hours * 3600.0
        with self._state_lock:
            for sid in [s for s, v in self.sessions.items() if v.created_at < deadline]:
                del self.sessions[sid]

    def enqueue_training(self, label: str) -> TrainTask:
        task = TrainTask(task_id=uuid.uuid4().hex, label=label)
        with self._state_lock:
            self.tasks[task.task_id] = task
        self._queue.put(task.task_id)
        return task

    def drain(self, timeout: float = 600.0) -> None:
        """Block until all queued tasks finished (used by tests and --watch)."""
        deadline = time.time() + timeout
        while time.time() < deadline:
            with self._state_lock:
                busy = any(t.state in ("queued", "running") for t in self.tasks.values())
            if not busy:
                return
            time.sleep(0.05)

    def _work_loop(self) -> None:
        while True:
            task_id = self._queue.get()
            task = self.tasks[task_id]
            task.state = "running"
            task.started_at = time.time()
            try:
                self._retrain(task)
                task.state = "done"
            except Exception as exc:  # surfaced via the task document
                task.state = "failed"
                task.error = str(exc)
            task.finished_at = time.time()

    def _retrain(self, task: TrainTask) -> None:
        cfg = self.cfg
        self.store.split_fractions(seed=cfg.seed)
        train_x, train_y = self.store.load_split("train")
        val_x, val_y = self.store.load_split("val")
        test_x, test_y = self.store.load_split("test")
        if len(val_x) == 0:
            val_x, val_y = train_x, train_y
        arch = build_named_arch(cfg.arch, self.store.num_classes)
        tc = TrainConfig(batch=min(cfg.train_batch, len(train_x)), lr=cfg.train_lr,
                         max_steps=cfg.train_max_steps, eval_every=cfg.train_eval_every,
                         patience=cfg.train_patience, seed=cfg.seed)
        version = (self._bundle.version + 1) if self._bundle else 1
        bundle, _ = train(arch, spectrogram_features(train_x), train_y,
                          spectrogram_features(val_x), val_y,
                          labels=self.store.labels(), cfg=tc, version=version)
        metrics = {"model_version": version, "num_classes": arch.num_classes,
                   "labels": [l.label_id for l in bundle.labels]}
        if len(test_x):
            feats = spectrogram_features(test_x)
            _, acc = evaluate(bundle, feats, test_y)
            cm = confusion_matrix(bundle, feats, test_y)
            metrics["accuracy"] = acc
            metrics["confusion_matrix"] = cm.tolist()
        self._publish(bundle)
        task.model_version = version
        task.metrics = metrics
        self.metrics = metrics


def _error(status: int, message: str, field_name: str | None = None) -> JSONResponse:
    body = {"error": message}
    if field_name:
        body["field"] = field_name
    return JSONResponse(body, status_code=status)


def _candidate_list(bundle: ModelBundle, feats: np.ndarray, k: int = 5) -> list[dict]:
    top = predict_topk(bundle, feats, k=k)
    scores = np.array([s for _, s in top])
    conf = np.exp(scores - scores.max())
    # softmax over the full class-score vector, restricted to the top-k rows
    all_scores = bundle.scores(feats).mean(axis=0)
    denom = np.sum(np.exp(all_scores - scores.max()))
    conf = conf / denom
    return [
        {"label": label.label_id, "score": float(s), "confidence": float(c)}
        for (label, s), c in zip(top, conf)
    ]


def create_app(cfg: ServiceConfig | None = None) -> FastAPI:
    cfg = cfg or ServiceConfig()
    app = FastAPI(title="roomrec", docs_url=None, redoc_url=None)
    rt = Runtime(cfg)
    app.state.runtime = rt

    @app.post("/api/v1/recognize")
    async def recognize(request: Request):
        body = await request.body()
        if len(body) > cfg.max_body_bytes:
            return _error(413, "request body too large")
        try:
            records = wav_bytes_to_records(body)
        except FormatError as exc:
            return _error(400, str(exc), field_name="body")
        if len(records) != 1:
            return _error(400, f"recognize expects exactly 1 record, got {len(records)}",
                          field_name="body")
        bundle = rt.bundle
        if bundle is None:
            return _error(409, "no trained model available yet")
        cands = _candidate_list(bundle, spectrogram_features(records), k=5)
        return {
            "label": cands[0]["label"],
            "confidence": cands[0]["confidence"],
            "topk": cands,
            "model_version": bundle.version,
        }

    @app.post("/api/v1/samples")
    async def samples(request: Request):
        rt.purge_sessions()
        body = await request.body()
        if len(body) > cfg.max_body_bytes:
            return _error(413, "request body too large")
        if not body:
            return _error(422, "empty batch")
        try:
            records = wav_bytes_to_records(body)
        except FormatError as exc:
            return _error(400, str(exc), field_name="body")
        if len(records) > cfg.max_batch_records:
            return _error(400, f"batch exceeds {cfg.max_batch_records} records")
        bundle = rt.bundle
        cands = []
        if bundle is not None:
            cands = _candidate_list(bundle, spectrogram_features(records), k=5)
        session = Session(session_id=uuid.uuid4().hex, records=records,
                          candidates=cands)
        with rt._state_lock:
            rt.sessions[session.session_id] = session
        return {"session_id": session.session_id, "candidates": cands}

    @app.get("/api/v1/sessions/{session_id}")
    async def session_status(session_id: str):
        rt.purge_sessions()
        session = rt.sessions.get(session_id)
        if session is None:
            return _error(404, f"unknown or expired session {session_id}")
        return {
            "session_id": session.session_id,
            "state": session.state,
            "record_count": len(session.records),
            "candidates": session.candidates,
        }

    @app.post("/api/v1/labels")
    async def labels(request: Request):
        rt.purge_sessions()
        doc = await request.json()
        session_id = doc.get("session_id")
        label = doc.get("label")
        if not session_id or not label:
            return _error(400, "session_id and label are required")
        session = rt.sessions.get(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id}")
        if session.state != "awaiting_label":
            return _error(409, f"session already {session.state}")
        existing = label in {l.label_id for l in rt.store.labels()}
        rt.store.ingest(session.records, [label] * len(session.records))
        session.state = "merged" if existing else "labeled"
        task = rt.enqueue_training(label)
        return {"task_id": task.task_id, "merged": existing}

    @app.get("/api/v1/tasks/{task_id}")
    async def task_status(task_id: str):
        task = rt.tasks.get(task_id)
        if task is None:
            return _error(404, f"unknown task {task_id}")
        return task.to_json()

    @app.get("/api/v1/rooms")
    async def rooms():
        return {
            "rooms": [
                {"label": l.label_id, "class_index": l.class_index,
                 "sample_count": rt.store.sample_count(l.label_id)}
                for l in rt.store.labels()
            ]
        }

    @app.get("/api/v1/metrics")
    async def metrics():
        if rt.metrics is None:
            return _error(404, "no completed training yet")
        return rt.metrics

    return app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="roomrec-server",
                                     description="Room recognition service")
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--host")
    parser.add_argument("--port", type=int)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except RoomrecError as exc:
        raise SystemExit(f"config error: {exc}")
    host = args.host or cfg.host
    port = args.port or cfg.port
    import uvicorn

    kwargs = {}
    if cfg.tls_cert and cfg.tls_key:
        kwargs = {"ssl_certfile": cfg.tls_cert, "ssl_keyfile": cfg.tls_key}
    uvicorn.run(create_app(cfg), host=host, port=port, **kwargs)


if __name__ == "__main__":
    main()
