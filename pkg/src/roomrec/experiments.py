"""Study harness: the four standing experiments over a synthetic corpus.

A corpus directory is a dataset store plus `sim_meta.json` recording the room
profiles, capture context, and master seed it was synthesized from, so every
experiment (including regeneration of interfered test variants) is a pure
function of the directory content and a seed.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from .errors import ConfigurationError, PolicyError
from .features import mfcc_features, psd_features, spectrogram_features
from .mfcc import BROADBAND, NARROWBAND
from .nn.arch import build_named_arch, count_params
from .nn.train import TrainConfig, evaluate, train
from .sim import CaptureContext, Interferer, RoomProfile, default_profiles, synth_corpus
from .store import DatasetStore, SplitPolicy
from .svm import svm_predict, svm_train
from .wavio import records_to_wav_bytes, wav_bytes_to_records

META_FILE = "sim_meta.json"

DESIGNS = (
    ("psd", "DNN-psd"),
    ("psd", "CNN-psd"),
    ("spectrogram", "DNN-spec"),
    ("spectrogram", "C"),
)


def build_corpus(out_dir, n_rooms: int = 10, per_room: int = 1000,
                 master_seed: int = 0, profile_seed: int = 7,
                 spot_jitter: float = 4.0, snr_db: float = 25.0,
                 policy: SplitPolicy | None = None) -> DatasetStore:
    """Synthesize, ingest, and split a corpus; write its generation metadata."""
    profiles = default_profiles(n_rooms, master_seed=profile_seed)
    ctx = CaptureContext(spot_jitter=spot_jitter, snr_db=snr_db)
    records, labels = synth_corpus(profiles, per_room, ctx, master_seed=master_seed)
    store = DatasetStore(out_dir)
    store.ingest(records, labels)
    store.split(policy or SplitPolicy(), seed=master_seed)
    meta = {
        "master_seed": master_seed,
        "per_room": per_room,
        "context": {"spot_jitter": spot_jitter, "snr_db": snr_db},
        "profiles": [asdict(p) for p in profiles],
    }
    (Path(out_dir) / META_FILE).write_text(json.dumps(meta, indent=1))
    return store


def load_corpus(path):
    """Open a corpus directory; returns (store, meta dict)."""
    store = DatasetStore(path)
    meta_path = Path(path) / META_FILE
    if not meta_path.exists():
        raise ConfigurationError(f"{path} has no {META_FILE}; not a built corpus")
    meta = json.loads(meta_path.read_text())
    if store.num_classes == 0:
        raise ConfigurationError(f"{path} holds no samples")
    return store, meta


def _require_splits(store: DatasetStore) -> tuple:
    splits = [store.load_split(s) for s in ("train", "val", "test")]
    if any(len(x) == 0 for x, _ in splits):
        raise PolicyError("corpus has no train/val/test assignment; split it first")
    return splits


def _provenance(store: DatasetStore, seed: int, **extra) -> list[str]:
    lines = [f"# seed={seed}", f"# corpus={store.corpus_sha()}"]
    lines += [f"# {k}={v}" for k, v in extra.items()]
    return lines


def _write(out_dir, name: str, text: str) -> None:
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / name).write_text(text)


def _train_design(arch_name: str, feats, labels_by_split, cfg: TrainConfig):
    (train_y, val_y, test_y) = labels_by_split
    (train_f, val_f, test_f) = feats
    arch = build_named_arch(arch_name, int(train_y.max()) + 1)
    bundle, history = train(arch, train_f, train_y, val_f, val_y, cfg=cfg)
    _, acc = evaluate(bundle, test_f, test_y)
    return bundle, history, acc


def run_design_matrix(corpus_dir, seed: int = 0, out_dir=None,
                      cfg: TrainConfig | None = None) -> dict[str, float]:
    """Test accuracy of {PSD, spectrogram} x {DNN, CNN}; emits design_matrix.csv."""
    store, _ = load_corpus(corpus_dir)
    (tx, ty), (vx, vy), (sx, sy) = _require_splits(store)
    inputs = {
        "psd": (psd_features(tx), psd_features(vx), psd_features(sx)),
        "spectrogram": (spectrogram_features(tx), spectrogram_features(vx),
                        spectrogram_features(sx)),
    }
    cfg = cfg or TrainConfig(max_steps=20000, eval_every=200, patience=15, seed=seed)
    results = {}
    rows = ["input,model,test_accuracy,best_step,wall_seconds"]
    for fmt, arch_name in DESIGNS:
        _, history, acc = _train_design(arch_name, inputs[fmt], (ty, vy, sy), cfg)
        results[f"{fmt}+{arch_name}"] = acc
        rows.append(f"{fmt},{arch_name},{acc:.4f},{history.best_step},"
                    f"{history.wall_seconds:.1f}")
    text = "\n".join(_provenance(store, seed, designs=len(DESIGNS)) + rows) + "\n"
    _write(out_dir, "design_matrix.csv", text)
    return results


def run_arch_sweep(corpus_dir, names=("A", "B", "C", "D", "E", "F", "G"),
                   seed: int = 0, out_dir=None,
                   cfg: TrainConfig | None = None) -> list[dict]:
    """Per-architecture parameter count, training time, and test accuracy."""
    store, _ = load_corpus(corpus_dir)
    (tx, ty), (vx, vy), (sx, sy) = _require_splits(store)
    feats = (spectrogram_features(tx), spectrogram_features(vx),
             spectrogram_features(sx))
    cfg = cfg or TrainConfig(max_steps=20000, eval_every=200, patience=15, seed=seed)
    rows = ["arch,params,wall_seconds,test_accuracy"]
    table = []
    for name in names:
        arch = build_named_arch(name, store.num_classes)
        _, history, acc = _train_design(name, feats, (ty, vy, sy), cfg)
        table.append({"arch": name, "params": count_params(arch),
                      "wall_seconds": history.wall_seconds, "test_accuracy": acc})
        rows.append(f"{name},{count_params(arch)},{history.wall_seconds:.1f},{acc:.4f}")
    text = "\n".join(_provenance(store, seed, archs=",".join(names)) + rows) + "\n"
    _write(out_dir, "arch_sweep.csv", text)
    return table


def run_volume_curve(corpus_dir, volumes=(100, 250, 375, 437, 500),
                     seed: int = 0, out_dir=None,
                     cfg: TrainConfig | None = None) -> dict[int, float]:
    """Test accuracy vs per-room training-sample count."""
    store, _ = load_corpus(corpus_dir)
    _, (vx, vy), (sx, sy) = _require_splits(store)
    val_f, test_f = spectrogram_features(vx), spectrogram_features(sx)
    cfg = cfg or TrainConfig(max_steps=20000, eval_every=200, patience=15, seed=seed)
    full_x, full_y = store.load_split("train")
    available = min(np.bincount(full_y))
    results = {}
    rows = ["volume,test_accuracy,best_step"]
    for volume in volumes:
        if volume > available:
            raise PolicyError(f"volume {volume} exceeds the {available} "
                              "training samples available per room")
        tx, ty = store.load_split("train", per_room_limit=volume)
        arch = build_named_arch("C", store.num_classes)
        bundle, history = train(arch, spectrogram_features(tx), ty, val_f, vy, cfg=cfg)
        _, acc = evaluate(bundle, test_f, sy)
        results[volume] = acc
        rows.append(f"{volume},{acc:.4f},{history.best_step}")
    text = "\n".join(_provenance(store, seed, volumes=",".join(map(str, volumes)))
                     + rows) + "\n"
    _write(out_dir, "volume_curve.csv", text)
    return results


def run_robustness(corpus_dir, interferer: Interferer | None = None,
                   seed: int = 0, out_dir=None, cfg: TrainConfig | None = None,
                   svm_train_per_room: int = 150) -> dict[str, dict[str, float]]:
    """Clean vs interfered test accuracy for the narrowband CNN and the two
    MFCC+SVM baselines.

    Models are trained on the clean corpus; the interferer is added at test
    time only, by regenerating the corpus from its stored metadata with the
    interfering track layered on (the underlying room responses are identical
    because interferer randomness is drawn last per record).
    """
    store, meta = load_corpus(corpus_dir)
    interferer = interferer or Interferer()
    profiles = [RoomProfile.from_json(json.dumps(p)) for p in meta["profiles"]]
    base = meta["context"]
    ctx_music = CaptureContext(spot_jitter=base["spot_jitter"],
                               snr_db=base["snr_db"], interferer=interferer)
    per_room = meta["per_room"]
    music_records, music_labels = synth_corpus(profiles, per_room, ctx_music,
                                               master_seed=meta["master_seed"])
    # match the 16-bit quantization the stored clean records went through
    music_records = wav_bytes_to_records(records_to_wav_bytes(music_records))
    # mirror the store's per-room split assignment onto the regenerated array
    label_ids = [l.label_id for l in store.labels()]
    policy_counts = _split_counts_from_store(store)
    music_test, music_test_y = _select_split(music_records, music_labels, label_ids,
                                             policy_counts, meta["master_seed"],
                                             "test")

    (tx, ty), (vx, vy), (sx, sy) = _require_splits(store)
    cfg = cfg or TrainConfig(max_steps=20000, eval_every=200, patience=15, seed=seed)

    results: dict[str, dict[str, float]] = {}

    bundle, _ = train(build_named_arch("C", store.num_classes),
                      spectrogram_features(tx), ty,
                      spectrogram_features(vx), vy, cfg=cfg)
    _, clean_acc = evaluate(bundle, spectrogram_features(sx), sy)
    _, music_acc = evaluate(bundle, spectrogram_features(music_test), music_test_y)
    results["cnn_narrowband"] = {"clean": clean_acc, "interfered": music_acc}

    sub_x, sub_y = store.load_split("train", per_room_limit=svm_train_per_room)
    for tag, band in (("svm_broadband", BROADBAND), ("svm_narrowband", NARROWBAND)):
        model = svm_train(mfcc_features(sub_x, band), sub_y, seed=seed)
        clean_pred = svm_predict(model, mfcc_features(sx, band))
        music_pred = svm_predict(model, mfcc_features(music_test, band))
        results[tag] = {
            "clean": float(np.mean(clean_pred == sy)),
            "interfered": float(np.mean(music_pred == music_test_y)),
        }

    rows = ["method,clean_accuracy,interfered_accuracy"]
    for method, cell in results.items():
        rows.append(f"{method},{cell['clean']:.4f},{cell['interfered']:.4f}")
    text = "\n".join(_provenance(store, seed, interferer_top_hz=interferer.top_hz,
                                 interferer_level=interferer.level) + rows) + "\n"
    _write(out_dir, "robustness.csv", text)
    return results


def _split_counts_from_store(store: DatasetStore) -> tuple[int, int, int]:
    entry = next(iter(store.rooms.values()))
    tags = [s.split for s in entry.samples]
    return tags.count("train"), tags.count("val"), tags.count("test")


def _select_split(records, labels, label_ids, counts, split_seed, which):
    """Reproduce the store's per-room permutation split on a parallel array.

    The corpus was ingested in generation order, so sample i of room r in the
    store corresponds to record r*per_room + i here; the same seeded
    permutation therefore selects the same underlying captures.
    """
    n_train, n_val, n_test = counts
    lo = {"train": 0, "val": n_train, "test": n_train + n_val}[which]
    hi = lo + {"train": n_train, "val": n_val, "test": n_test}[which]
    rows, ys = [], []
    labels = np.asarray(labels)
    for class_index, label_id in enumerate(label_ids):
        room_rows = np.where(labels == label_id)[0]
        rng = np.random.default_rng([split_seed, class_index])
        order = rng.permutation(len(room_rows))
        # order[pos] is the in-room sample index assigned to position pos;
        # positions [lo, hi) carry the requested split tag
        chosen = [room_rows[idx] for pos, idx in enumerate(order) if lo <= pos < hi]
        rows += chosen
        ys += [class_index] * len(chosen)
    return np.stack([records[i] for i in rows]), np.asarray(ys, dtype=int)


@click.group()
def cli():
    """Experiment harness over synthetic corpora."""


@cli.command("build-corpus")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--rooms", default=10, show_default=True)
@click.option("--per-room", default=1000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--spot-jitter", default=4.0, show_default=True)
@click.option("--snr-db", default=25.0, show_default=True)
def build_corpus_cmd(out_dir, rooms, per_room, seed, spot_jitter, snr_db):
    """Synthesize and split a labeled corpus."""
    t0 = time.time()
    train_n = per_room // 2
    rest = (per_room - train_n) // 2
    store = build_corpus(out_dir, n_rooms=rooms, per_room=per_room,
                         master_seed=seed, spot_jitter=spot_jitter, snr_db=snr_db,
                         policy=SplitPolicy(train=train_n, val=rest, test=rest))
    click.echo(f"built {rooms} rooms x {per_room} records in {time.time() - t0:.0f}s "
               f"(corpus {store.corpus_sha()})")


@cli.command("run")
@click.argument("name", type=click.Choice(["design-matrix", "arch-sweep",
                                           "volume-curve", "robustness"]))
@click.option("--corpus", "corpus_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--max-steps", default=20000, show_default=True)
@click.option("--volumes", default="100,250,375,437,500", show_default=True,
              help="per-room training volumes (volume-curve only)")
def run_cmd(name, corpus_dir, seed, out_dir, max_steps, volumes):
    """Run one named experiment and write its CSV + JSON summary."""
    cfg = TrainConfig(max_steps=max_steps, eval_every=200, patience=15, seed=seed)
    kwargs = {}
    if name == "volume-curve":
        kwargs["volumes"] = tuple(int(v) for v in volumes.split(","))
    runner = {
        "design-matrix": run_design_matrix,
        "arch-sweep": run_arch_sweep,
        "volume-curve": run_volume_curve,
        "robustness": run_robustness,
    }[name]
    result = runner(corpus_dir, seed=seed, out_dir=out_dir, cfg=cfg, **kwargs)
    summary = Path(out_dir) / f"{name.replace('-', '_')}.json"
    summary.write_text(json.dumps(result, indent=1))
    click.echo(json.dumps(result, indent=1))


def main(argv=None):
    cli.main(args=argv, standalone_mode=False)


if __name__ == "__main__":
    main()
