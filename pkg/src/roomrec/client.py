"""Command-line client: capture records, upload them, and label sessions.

Capture sources:
  device        real microphone capture (not available headless)
  file:PATH     records read from an existing WAV file
  sim:PATH      synthesized from a room profile JSON file

Exit codes: 0 success, 2 usage error, 3 capture error, 4 transport error,
5 server-reported error. The server URL defaults to $ROOMREC_SERVER.
"""
from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np
import requests

from .errors import CaptureError, TransportError
from .sim import CaptureContext, RoomProfile, record_rng, synth_record
from .wavio import records_to_wav_bytes, wav_read, wav_write

EXIT_CAPTURE = 3
EXIT_TRANSPORT = 4
EXIT_SERVER = 5

RECOGNITION_RECORDS = 1
TRAINING_RECORDS = 500


def emit_record(mode: str, source: str, seed: int = 0) -> np.ndarray:
    """Capture 1 (recognition) or 500 (training) records from a source."""
    count = RECOGNITION_RECORDS if mode == "recognition" else TRAINING_RECORDS
    kind, _, locator = source.partition(":")
    if kind == "device":
        raise CaptureError("no capture device available in this environment")
    if kind == "file":
        records = wav_read(locator)
        if len(records) < count:
            raise CaptureError(
                f"{locator} holds {len(records)} records, {mode} mode needs {count}")
        return records[:count]
    if kind == "sim":
        try:
            profile = RoomProfile.from_json(Path(locator).read_text())
        except (OSError, ValueError, KeyError) as exc:
            raise CaptureError(f"unreadable room profile {locator}: {exc}") from exc
        ctx = CaptureContext()
        return np.stack([
            synth_record(profile, ctx, record_rng(seed, profile.seed, i))
            for i in range(count)
        ])
    raise CaptureError(f"unknown capture source {source!r}")


def _post(url: str, **kwargs):
    try:
        return requests.post(url, timeout=120, **kwargs)
    except requests.RequestException as exc:
        raise TransportError(f"cannot reach server: {exc} (is it running?)") from exc


def _get(url: str):
    try:
        return requests.get(url, timeout=30)
    except requests.RequestException as exc:
        raise TransportError(f"cannot reach server: {exc} (is it running?)") from exc


def upload_data(mode: str, records: np.ndarray, server: str) -> dict:
    """POST records to /recognize (recognition) or /samples (training)."""
    endpoint = "recognize" if mode == "recognition" else "samples"
    resp = _post(f"{server}/api/v1/{endpoint}", data=records_to_wav_bytes(records))
    return _check(resp)


def upload_label(session_id: str, label: str, server: str) -> dict:
    resp = _post(f"{server}/api/v1/labels",
                 json={"session_id": session_id, "label": label})
    return _check(resp)


def watch_task(task_id: str, server: str, poll_s: float = 0.5,
               timeout_s: float = 3600.0) -> dict:
    deadline = time.time() + timeout_s
    while True:
        doc = _check(_get(f"{server}/api/v1/tasks/{task_id}"))
        if doc["state"] in ("done", "failed"):
            return doc
        if time.time() > deadline:
            raise TransportError(f"task {task_id} still {doc['state']} after timeout")
        time.sleep(poll_s)


def _check(resp) -> dict:
    if resp.status_code >= 400:
        try:
            message = resp.json().get("error", resp.text)
        except ValueError:
            message = resp.text
        raise ServerError(resp.status_code, message)
    return resp.json()


class ServerError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(f"server returned {status}: {message}")
        self.status = status


server_option = click.option(
    "--server", envvar="ROOMREC_SERVER", default="http://127.0.0.1:8000",
    show_default=True, help="service base URL (env: ROOMREC_SERVER)")
mode_option = click.option(
    "--mode", type=click.Choice(["recognition", "training"]), required=True)


@click.group()
def cli():
    """Room recognition client."""


@cli.command("emit-record")
@mode_option
@click.option("--source", required=True,
              help="device, file:PATH, or sim:PROFILE_JSON")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", default=0, show_default=True)
def emit_record_cmd(mode, source, out, seed):
    """Capture one record (recognition) or 500 records (training)."""
    records = emit_record(mode, source, seed=seed)
    wav_write(records, out)
    click.echo(f"wrote {len(records)} record(s) to {out}")


@cli.command("upload")
@mode_option
@click.option("--in", "in_path", required=True, type=click.Path(exists=True),
              help="WAV file produced by emit-record")
@server_option
def upload_cmd(mode, in_path, server):
    """Send captured records to the service."""
    records = wav_read(in_path)
    want = RECOGNITION_RECORDS if mode == "recognition" else len(records)
    doc = upload_data(mode, records[:want], server)
    if mode == "recognition":
        click.echo(f"label: {doc['label']}  confidence: {doc['confidence']:.3f}")
        for cand in doc["topk"]:
            click.echo(f"  {cand['label']}: {cand['score']:.3f}")
    else:
        click.echo(f"session: {doc['session_id']}")
        if doc["candidates"]:
            click.echo("candidates:")
            for cand in doc["candidates"]:
                click.echo(f"  {cand['label']}: {cand['score']:.3f}")
        else:
            click.echo("candidates: none (no trained model yet)")


@cli.command("label")
@click.option("--session", "session_id", required=True)
@click.option("--label", required=True)
@click.option("--watch", is_flag=True, help="poll the retrain task to completion")
@server_option
def label_cmd(session_id, label, watch, server):
    """Assign a room label to an uploaded session."""
    doc = upload_label(session_id, label, server)
    click.echo(f"task: {doc['task_id']}")
    if watch:
        final = watch_task(doc["task_id"], server)
        click.echo(f"task state: {final['state']}")
        if final["state"] == "failed":
            raise ServerError(500, final.get("error") or "training failed")
        metrics = final.get("metrics") or {}
        if "accuracy" in metrics:
            click.echo(f"accuracy: {metrics['accuracy']:.3f}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        return 2
    except click.ClickException as exc:
        exc.show()
        return 2
    except CaptureError as exc:
        click.echo(f"capture error: {exc}", err=True)
        return EXIT_CAPTURE
    except TransportError as exc:
        click.echo(f"transport error: {exc}", err=True)
        return EXIT_TRANSPORT
    except ServerError as exc:
        click.echo(f"server error: {exc}", err=True)
        return EXIT_SERVER


if __name__ == "__main__":
    sys.exit(main())
