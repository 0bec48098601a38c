"""Batch command-line entry points.

Subcommands compose the pipeline end to end: synth -> qc -> adapter train /
extract -> fusion train / eval -> report. Every run writes a resolved-config
snapshot next to its outputs. Values resolve as: built-in defaults, then the
--config JSON file, then explicit flags.

Exit codes: 0 success, 2 config error, 3 data/format error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .adapters import AdapterNet, EmotionAdapter
from .data import (
    EmbeddingStore,
    MELD_CLASS_WEIGHTS,
    SynthConfig,
    adapter_dataset,
    fused_dataset,
    load_profiles,
    read_emb1,
    read_manifest,
    scheme_labels,
    split_records,
    synth_generate,
    write_emb1,
    write_manifest,
)
from .errors import ConfigError, DataError, EmofuseError, NumericError
from .fusion import FusionModel, MambaFusionClassifier, write_history_csv
from .metrics import confusion, render_report
from .qc import QcConfig, run_qc

PRED_HEADER = ["utterance_id", "gold", "pred"]


def _load_config_file(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def _resolve(defaults, file_cfg, flag_values):
    unknown = set(file_cfg) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    resolved = dict(defaults)
    resolved.update(file_cfg)
    for k, v in flag_values.items():
        if v is not None:
            resolved[k] = v
    return resolved


def _write_snapshot(resolved, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "resolved_config.json", "w") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True)


# --- synth -----------------------------------------------------------------

SYNTH_DEFAULTS = {
    "scheme": "meld7",
    "train_per_class": 100,
    "val_per_class": 20,
    "test_per_class": 0,
    "separation": 1.0,
    "noise": 0.1,
    "speaker_pool": 12,
    "signal_modalities": ["text", "face", "speaker"],
    "seed": 0,
}


def cmd_synth(args):
    resolved = _resolve(
        SYNTH_DEFAULTS,
        _load_config_file(args.config),
        {
            "scheme": args.scheme,
            "train_per_class": args.train_per_class,
            "val_per_class": args.val_per_class,
            "test_per_class": args.test_per_class,
            "separation": args.separation,
            "noise": args.noise,
            "seed": args.seed,
        },
    )
    cfg = SynthConfig(
        scheme=resolved["scheme"],
        train_per_class=resolved["train_per_class"],
        val_per_class=resolved["val_per_class"],
        test_per_class=resolved["test_per_class"],
        separation=resolved["separation"],
        noise=resolved["noise"],
        speaker_pool=resolved["speaker_pool"],
        signal_modalities=tuple(resolved["signal_modalities"]),
        seed=resolved["seed"],
    )
    records = synth_generate(cfg, args.out)
    _write_snapshot(resolved, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


# --- qc --------------------------------------------------------------------

QC_DEFAULTS = {
    "cos_threshold": 0.25,
    "lev_threshold": 0.3,
    "face_threshold": 0.3,
    "offsets": [0.0, -0.25, 0.25, -0.5, 0.5],
}


def cmd_qc(args):
    resolved = _resolve(
        QC_DEFAULTS,
        _load_config_file(args.config),
        {
            "cos_threshold": args.cos_threshold,
            "lev_threshold": args.lev_threshold,
            "face_threshold": args.face_threshold,
        },
    )
    cfg = QcConfig(
        cos_threshold=resolved["cos_threshold"],
        lev_threshold=resolved["lev_threshold"],
        face_threshold=resolved["face_threshold"],
        offsets=tuple(resolved["offsets"]),
    )
    corpus = Path(args.corpus)
    records = read_manifest(corpus / "manifest.jsonl")
    store = EmbeddingStore(corpus)
    profiles_path = corpus / "profiles.json"
    profiles = load_profiles(store, profiles_path) if profiles_path.exists() else None

    verified, report = run_qc(records, store, cfg, profiles)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(verified, out / "verified_manifest.jsonl")
    (out / "qc_report.json").write_text(report.to_json())
    (out / "qc_report.txt").write_text(report.to_text() + "\n")
    _write_snapshot(resolved, out)
    print(report.to_text())
    return 0


# --- adapters --------------------------------------------------------------

ADAPTER_DEFAULTS = {
    "lr": 1e-3,
    "weight_decay": 1e-5,
    "batch_size": 32,
    "max_epochs": 100,
    "early_stop_patience": 10,
    "plateau_factor": 0.1,
    "plateau_patience": 5,
    "dropout_rate": 0.3,
    "seed": 0,
    "scheme": "meld7",
}


def cmd_adapter_train(args):
    resolved = _resolve(
        ADAPTER_DEFAULTS,
        _load_config_file(args.config),
        {
            "lr": args.lr,
            "max_epochs": args.max_epochs,
            "seed": args.seed,
            "scheme": args.scheme,
        },
    )
    corpus = Path(args.corpus)
    records = read_manifest(corpus / args.manifest, scheme=resolved["scheme"])
    store = EmbeddingStore(corpus)
    scheme = resolved["scheme"]
    x_train, y_train = adapter_dataset(
        split_records(records, "train"), store, args.modality, scheme
    )
    x_val, y_val = adapter_dataset(
        split_records(records, "dev"), store, args.modality, scheme
    )
    adapter = EmotionAdapter(
        n_classes=len(scheme_labels(scheme)),
        lr=resolved["lr"],
        weight_decay=resolved["weight_decay"],
        batch_size=resolved["batch_size"],
        max_epochs=resolved["max_epochs"],
        early_stop_patience=resolved["early_stop_patience"],
        plateau_factor=resolved["plateau_factor"],
        plateau_patience=resolved["plateau_patience"],
        dropout_rate=resolved["dropout_rate"],
        seed=resolved["seed"],
    )
    adapter.fit(x_train, y_train, X_val=x_val, y_val=y_val)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    adapter.save(out / f"{args.modality}_adapter.adp1")
    write_history_csv(adapter.history_, out / f"{args.modality}_history.csv")
    _write_snapshot(resolved, out)
    print(
        f"{args.modality} adapter: best epoch {adapter.best_epoch_}, "
        f"val macro-F1 {adapter.best_val_f1_:.4f}"
    )
    return 0


def cmd_adapter_extract(args):
    net = AdapterNet.load(args.adapter)
    matrix = read_emb1(args.embeddings)
    net.eval()
    _, adapted = net.forward(matrix)
    write_emb1(adapted.astype(np.float32), args.out)
    print(f"wrote {adapted.shape[0]} x {adapted.shape[1]} adapted embeddings to {args.out}")
    return 0


# --- fusion ----------------------------------------------------------------

FUSION_DEFAULTS = {
    "scheme": "meld7",
    "modalities": ["text", "face", "speaker"],
    "d_state": 64,
    "expand": 2,
    "d_conv": 4,
    "lr": 1e-5,
    "batch_size": 32,
    "max_epochs": 200,
    "early_stop_patience": 10,
    "smoothing": 0.2,
    "weight_decay": 0.01,
    "seed": 0,
}


def _load_adapters(args, modalities):
    face_adapter = speaker_adapter = None
    if "face" in modalities:
        if not args.face_adapter:
            raise ConfigError("--face-adapter required for the face modality")
        face_adapter = EmotionAdapter().load(args.face_adapter)
    if "speaker" in modalities:
        if not args.speaker_adapter:
            raise ConfigError("--speaker-adapter required for the speaker modality")
        speaker_adapter = EmotionAdapter().load(args.speaker_adapter)
    return face_adapter, speaker_adapter


def _fusion_resolved(args):
    return _resolve(
        FUSION_DEFAULTS,
        _load_config_file(args.config),
        {
            "scheme": args.scheme,
            "modalities": args.modalities.split(",") if args.modalities else None,
            "lr": getattr(args, "lr", None),
            "max_epochs": getattr(args, "max_epochs", None),
            "seed": getattr(args, "seed", None),
        },
    )


def cmd_fusion_train(args):
    resolved = _fusion_resolved(args)
    scheme = resolved["scheme"]
    modalities = tuple(resolved["modalities"])
    labels = scheme_labels(scheme)
    corpus = Path(args.corpus)
    records = read_manifest(corpus / args.manifest, scheme=scheme)
    store = EmbeddingStore(corpus)
    face_adapter, speaker_adapter = _load_adapters(args, modalities)

    seq_train, y_train = fused_dataset(
        split_records(records, "train"), store, modalities, scheme, face_adapter, speaker_adapter
    )
    seq_val, y_val = fused_dataset(
        split_records(records, "dev"), store, modalities, scheme, face_adapter, speaker_adapter
    )
    class_weights = MELD_CLASS_WEIGHTS if scheme == "meld7" and not args.uniform_weights else None
    clf = MambaFusionClassifier(
        n_classes=len(labels),
        d_state=resolved["d_state"],
        expand=resolved["expand"],
        d_conv=resolved["d_conv"],
        lr=resolved["lr"],
        batch_size=resolved["batch_size"],
        max_epochs=resolved["max_epochs"],
        early_stop_patience=resolved["early_stop_patience"],
        class_weights=class_weights,
        smoothing=resolved["smoothing"],
        weight_decay=resolved["weight_decay"],
        seed=resolved["seed"],
    )
    clf.fit(seq_train, y_train, X_val=seq_val, y_val=y_val)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    clf.save(out / "fusion.adp1")
    write_history_csv(clf.history_, out / "fusion_history.csv")
    _write_snapshot(resolved, out)
    print(
        f"fusion ({'+'.join(modalities)}): best epoch {clf.best_epoch_}, "
        f"val weighted-F1 {clf.best_val_weighted_f1_:.4f}"
    )
    return 0


def cmd_fusion_eval(args):
    resolved = _fusion_resolved(args)
    scheme = resolved["scheme"]
    modalities = tuple(resolved["modalities"])
    labels = scheme_labels(scheme)
    corpus = Path(args.corpus)
    records = read_manifest(corpus / args.manifest, scheme=scheme)
    split = split_records(records, args.split)
    if not split:
        raise DataError(f"no records in split {args.split!r}")
    store = EmbeddingStore(corpus)
    face_adapter, speaker_adapter = _load_adapters(args, modalities)
    sequences, golds = fused_dataset(
        split, store, modalities, scheme, face_adapter, speaker_adapter
    )
    model = FusionModel.load(args.model)
    preds = model.forward(sequences).argmax(axis=1)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "predictions.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PRED_HEADER)
        for rec, g, p in zip(split, golds, preds):
            writer.writerow([rec.utterance_id, labels[g], labels[int(p)]])
    cm = confusion([labels[g] for g in golds], [labels[int(p)] for p in preds], scheme)
    text, csv_text = render_report(cm, scheme)
    (out / "metrics.csv").write_text(csv_text)
    (out / "report.txt").write_text(text + "\n")
    _write_snapshot(resolved, out)
    print(text)
    return 0


# --- report ----------------------------------------------------------------

def cmd_report(args):
    with open(args.predictions) as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != PRED_HEADER:
        raise DataError(f"{args.predictions}: expected header {PRED_HEADER}")
    golds = [r[1] for r in rows[1:]]
    preds = [r[2] for r in rows[1:]]
    cm = confusion(golds, preds, args.scheme)
    text, csv_text = render_report(cm, args.scheme)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.csv").write_text(csv_text)
        (out / "report.txt").write_text(text + "\n")
    print(text)
    return 0


# --- parser ----------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="emofuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a seeded synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--scheme")
    p.add_argument("--train-per-class", type=int, dest="train_per_class")
    p.add_argument("--val-per-class", type=int, dest="val_per_class")
    p.add_argument("--test-per-class", type=int, dest="test_per_class")
    p.add_argument("--separation", type=float)
    p.add_argument("--noise", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("qc", help="run quality control over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--cos-threshold", type=float, dest="cos_threshold")
    p.add_argument("--lev-threshold", type=float, dest="lev_threshold")
    p.add_argument("--face-threshold", type=float, dest="face_threshold")
    p.set_defaults(func=cmd_qc)

    p = sub.add_parser("adapter-train", help="train a modality adapter")
    p.add_argument("--corpus", required=True)
    p.add_argument("--manifest", default="manifest.jsonl")
    p.add_argument("--modality", required=True, choices=["face", "speaker"])
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--scheme")
    p.add_argument("--lr", type=float)
    p.add_argument("--max-epochs", type=int, dest="max_epochs")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_adapter_train)

    p = sub.add_parser("adapter-extract", help="project raw embeddings to 128-d")
    p.add_argument("--adapter", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_adapter_extract)

    for name, fn in (("fusion-train", cmd_fusion_train), ("fusion-eval", cmd_fusion_eval)):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} on a corpus")
        p.add_argument("--corpus", required=True)
        p.add_argument("--manifest", default="manifest.jsonl")
        p.add_argument("--out", required=True)
        p.add_argument("--config")
        p.add_argument("--scheme")
        p.add_argument("--modalities")
        p.add_argument("--face-adapter", dest="face_adapter")
        p.add_argument("--speaker-adapter", dest="speaker_adapter")
        if name == "fusion-train":
            p.add_argument("--lr", type=float)
            p.add_argument("--max-epochs", type=int, dest="max_epochs")
            p.add_argument("--seed", type=int)
            p.add_argument("--uniform-weights", action="store_true", dest="uniform_weights")
        else:
            p.add_argument("--model", required=True)
            p.add_argument("--split", default="test")
        p.set_defaults(func=fn)

    p = sub.add_parser("report", help="render a confusion report from predictions")
    p.add_argument("--predictions", required=True)
    p.add_argument("--scheme", default="meld7")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4
    except (EmofuseError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
