"""Persistent labeled-sample store.

Layout on disk: one directory per room full of single-record WAV files, plus
`manifest.json` at the root:

    { version, rooms: [{label_id, class_index, samples: [{file, split, sha256}]}] }

Mutations are serialized by a store-level lock (single writer, many readers).
"""
from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, PolicyError
from .wavio import records_to_wav_bytes, wav_read

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class RoomLabel:
    label_id: str
    class_index: int


@dataclass
class SampleRef:
    file: str
    split: str = "train"
    sha256: str = ""


@dataclass
class RoomEntry:
    label: RoomLabel
    samples: list[SampleRef] = field(default_factory=list)


@dataclass(frozen=True)
class SplitPolicy:
    train: int = 500
    val: int = 250
    test: int = 250

    def __post_init__(self):
        if min(self.train, self.val, self.test) <= 0:
            raise ConfigurationError("split counts must be positive")


class DatasetStore:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self.version = 0
        self.rooms: dict[str, RoomEntry] = {}
        if self.manifest_path.exists():
            self._load()

    @property
    def manifest_path(self) -> Path:
        return self.root / "manifest.json"

    # -- manifest persistence ------------------------------------------------

    def _load(self) -> None:
        doc = json.loads(self.manifest_path.read_text())
        self.version = doc["version"]
        self.rooms = {}
        for r in doc["rooms"]:
            entry = RoomEntry(label=RoomLabel(r["label_id"], r["class_index"]))
            entry.samples = [SampleRef(**s) for s in r["samples"]]
            self.rooms[r["label_id"]] = entry

    def _save(self) -> None:
        doc = {
            "version": self.version,
            "rooms": [
                {
                    "label_id": e.label.label_id,
                    "class_index": e.label.class_index,
                    "samples": [vars(s) for s in e.samples],
                }
                for e in sorted(self.rooms.values(), key=lambda e: e.label.class_index)
            ],
        }
        tmp = self.manifest_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, indent=1))
        tmp.replace(self.manifest_path)

    # -- queries ---------------------------------------------------------------

    def labels(self) -> list[RoomLabel]:
        return sorted((e.label for e in self.rooms.values()), key=lambda l: l.class_index)

    @property
    def num_classes(self) -> int:
        return len(self.rooms)

    def sample_count(self, label_id: str) -> int:
        return len(self.rooms[label_id].samples)

    # -- mutations -------------------------------------------------------------

    def ingest(self, records: np.ndarray, labels: list[str]) -> int:
        """Persist a labeled batch; new labels get the next class indices.

        Records identical (by content hash) to already-stored samples of the
        same room are skipped, so re-ingesting a batch is idempotent apart
        from the version bump. Returns the new manifest version.
        """
        records = np.atleast_2d(np.asarray(records))
        if records.shape[0] != len(labels):
            raise ConfigurationError("one label per record required")
        with self._lock:
            for row, label_id in zip(records, labels):
                entry = self.rooms.get(label_id)
                if entry is None:
                    entry = RoomEntry(label=RoomLabel(label_id, len(self.rooms)))
                    self.rooms[label_id] = entry
                    (self.root / label_id).mkdir(exist_ok=True)
                blob = records_to_wav_bytes(row)
                digest = hashlib.sha256(blob).hexdigest()
                if any(s.sha256 == digest for s in entry.samples):
                    continue
                rel = f"{label_id}/{digest[:16]}.wav"
                (self.root / rel).write_bytes(blob)
                entry.samples.append(SampleRef(file=rel, split="train", sha256=digest))
            self.version += 1
            self._save()
            return self.version

    def split(self, policy: SplitPolicy = SplitPolicy(), seed: int = 0) -> None:
        """Deterministic per-room shuffle + train/val/test assignment.

        Rooms must hold at least train+val+test samples; any surplus samples
        stay in the training split.
        """
        need = policy.train + policy.val + policy.test
        with self._lock:
            for entry in self.rooms.values():
                if len(entry.samples) < need:
                    raise PolicyError(
                        f"room {entry.label.label_id!r} has {len(entry.samples)} "
                        f"samples, policy needs {need}"
                    )
            for entry in self.rooms.values():
                rng = np.random.default_rng([seed, entry.label.class_index])
                order = rng.permutation(len(entry.samples))
                for pos, idx in enumerate(order):
                    if pos < policy.train:
                        tag = "train"
                    elif pos < policy.train + policy.val:
                        tag = "val"
                    elif pos < need:
                        tag = "test"
                    else:
                        tag = "train"
                    entry.samples[idx].split = tag
            self.version += 1
            self._save()

    def split_fractions(self, fractions=(0.5, 0.25, 0.25), seed: int = 0) -> None:
        """Proportional split for rooms with arbitrary sample counts.

        Used by the service, where uploaded batches are rarely the canonical
        1000 records. Every room keeps at least one training sample.
        """
        with self._lock:
            for entry in self.rooms.values():
                n = len(entry.samples)
                rng = np.random.default_rng([seed, entry.label.class_index])
                order = rng.permutation(n)
                n_train = max(1, int(round(fractions[0] * n)))
                n_val = int(round(fractions[1] * n))
                for pos, idx in enumerate(order):
                    if pos < n_train:
                        entry.samples[idx].split = "train"
                    elif pos < n_train + n_val:
                        entry.samples[idx].split = "val"
                    else:
                        entry.samples[idx].split = "test"
            self.version += 1
            self._save()

    # -- bulk access -------------------------------------------------------------

    def load_split(self, split: str, per_room_limit: int | None = None):
        """Load all samples with the given tag as (records, class_indices)."""
        if split not in SPLITS:
            raise ConfigurationError(f"unknown split {split!r}")
        rows, classes = [], []
        for entry in sorted(self.rooms.values(), key=lambda e: e.label.class_index):
            taken = 0
            for ref in entry.samples:
                if ref.split != split:
                    continue
                if per_room_limit is not None and taken >= per_room_limit:
                    break
                rows.append(wav_read(self.root / ref.file)[0])
                classes.append(entry.label.class_index)
                taken += 1
        if not rows:
            return np.empty((0, 0)), np.empty((0,), dtype=int)
        return np.stack(rows), np.asarray(classes, dtype=int)

    def corpus_sha(self) -> str:
        """Stable digest of the manifest content, for experiment provenance."""
        h = hashlib.sha256()
        for entry in sorted(self.rooms.values(), key=lambda e: e.label.class_index):
            for ref in sorted(entry.samples, key=lambda s: s.sha256):
                h.update(ref.sha256.encode())
        return h.hexdigest()[:16]
