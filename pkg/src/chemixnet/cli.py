"""Command-line entry point: ``chemixnet <subcommand> [flags]``.

Every subcommand writes a JSON result file plus a plain-text log into ``--out``.
Only ``CHEMIXNET_LOG`` (a logging level name) is read from the environment.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .data_pipeline import (
    ColumnSchema,
    attach_fingerprints,
    dataset_stats,
    load_dataset,
    split_dataset,
    undersample_majority,
)
from .errors import ChemixError
from .fingerprint import KEY_TABLE_VERSION, fingerprint_smiles, import_fingerprints, write_fingerprints
from .model_zoo import ArchitectureSpec
from .smiles_codec import build_vocabulary, encode_one_hot
from .trainer import (
    DATASET_BATCH_SIZES,
    TrainingConfig,
    evaluate,
    predict,
    prepare_model,
    read_checkpoint,
    save_checkpoint,
    train,
)

log = logging.getLogger("chemixnet")


class UsageError(Exception):
    pass


def _setup_logging(out: Path, command: str) -> None:
    level = os.environ.get("CHEMIXNET_LOG", "INFO").upper()
    root = logging.getLogger()
    for h in list(root.handlers):
        root.removeHandler(h)
        h.close()
    root.setLevel(getattr(logging, level, logging.INFO))
    fmt = logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
    for handler in (logging.StreamHandler(sys.stderr), logging.FileHandler(out / f"{command}.log", mode="w")):
        handler.setFormatter(fmt)
        root.addHandler(handler)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _schema(args) -> ColumnSchema:
    return ColumnSchema(args.smiles_col, getattr(args, "target_col", None), args.id_col)


def _records(args, task="regression", need_target=False):
    if not args.data:
        raise UsageError("--data is required")
    if need_target and not args.target_col:
        raise UsageError("--target-col is required")
    return load_dataset(args.data, _schema(args), task)


def _with_fingerprints(records, args):
    sidecar = import_fingerprints(args.fingerprints) if args.fingerprints else None
    return attach_fingerprints(records, sidecar, compute_missing=not args.no_compute_fingerprints)


def _dataset_name(args) -> str:
    return args.dataset or Path(args.data).stem.lower()


# --- subcommands ---------------------------------------------------------------


def cmd_stats(args, out: Path) -> dict:
    records = _records(args, args.task)
    st = dataset_stats(records, args.task if args.target_col else None)
    log.info("%s: %d records, vocabulary %d, max length %d", args.data, st.record_count, st.vocab_size,
             st.max_sequence_length)
    result = {"data": str(args.data), **asdict(st)}
    print(json.dumps(result, sort_keys=True))
    return result


def cmd_encode(args, out: Path) -> dict:
    if args.smiles:
        smiles, ids = list(args.smiles), [f"in{i + 1}" for i in range(len(args.smiles))]
    else:
        records = _records(args)
        smiles, ids = [r.smiles for r in records], [r.id for r in records]
    vocab = build_vocabulary(smiles)
    max_len = args.max_len or max(len(s) for s in smiles)
    encoded = [encode_one_hot(s, vocab, max_len) for s in smiles]
    np.savez(out / "onehot.npz", onehot=np.stack([e.matrix for e in encoded]),
             lengths=np.array([e.true_length for e in encoded]), ids=np.array(ids))
    vocab.save(out / "vocab.txt")
    log.info("encoded %d strings to (%d, %d, %d)", len(smiles), len(smiles), max_len, vocab.size)
    return {"n": len(smiles), "max_len": max_len, "vocab_size": vocab.size,
            "tensor": str(out / "onehot.npz"), "vocabulary": str(out / "vocab.txt")}


def cmd_fingerprint(args, out: Path) -> dict:
    if args.smiles:
        fps = {f"in{i + 1}": fingerprint_smiles(s) for i, s in enumerate(args.smiles)}
        for fp in fps.values():
            print(fp.to_bitstring())
    else:
        fps = {r.id: fingerprint_smiles(r.smiles) for r in _records(args)}
    path = out / "fingerprints.csv"
    write_fingerprints(path, fps)
    log.info("wrote %d fingerprints to %s", len(fps), path)
    return {"n": len(fps), "key_table": KEY_TABLE_VERSION, "fingerprints": str(path)}


def _training_config(args, spec: ArchitectureSpec) -> TrainingConfig:
    name = _dataset_name(args)
    default_bs = DATASET_BATCH_SIZES.get(name, 32 if spec.task == "classification" else 16)
    return TrainingConfig(
        learning_rate=args.lr,
        batch_size=args.batch_size or default_bs,
        max_epochs=args.epochs or (25 if name == "cep" else 200),
        early_stop_patience=args.patience,
        seed=args.seed,
        target_normalization=args.normalization,
    )


def cmd_train(args, out: Path) -> dict:
    if not args.arch:
        raise UsageError("--arch is required")
    spec = ArchitectureSpec.from_text(Path(args.arch).read_text(encoding="utf-8"))
    records = _records(args, spec.task, need_target=True)
    if args.undersample:
        records = undersample_majority(records, args.seed)
    if spec.needs_fingerprint:
        records = _with_fingerprints(records, args)
    split = split_dataset(records, args.seed)
    config = _training_config(args, spec)
    log.info("%s on %s: %d/%d/%d records, %s", spec.family, args.data, len(split.train),
             len(split.validation), len(split.test), config)
    model = prepare_model(spec, records, args.seed)
    model, history = train(model, split, config)
    history.save_csv(out / "history.csv")
    save_checkpoint(model, out / "model.ckpt", config, extra={"split_seed": args.seed, "data": Path(args.data).name})
    report = evaluate(model, split.test, dataset=_dataset_name(args), seed=args.seed)
    log.info("best epoch %d of %d; test %s %.6g", history.best_epoch, history.stopped_epoch, report.metric, report.value)
    return {"report": asdict(report), "best_epoch": history.best_epoch, "stopped_epoch": history.stopped_epoch,
            "checkpoint": str(out / "model.ckpt"), "history": str(out / "history.csv")}


def _load(args):
    if not args.checkpoint:
        raise UsageError("--checkpoint is required")
    return read_checkpoint(args.checkpoint)


def cmd_evaluate(args, out: Path) -> dict:
    ckpt = _load(args)
    model = ckpt.model
    records = _records(args, model.spec.task, need_target=True)
    seed = args.seed if args.seed is not None else ckpt.extra.get("split_seed", 0)
    if args.undersample:
        records = undersample_majority(records, seed)
    if model.spec.needs_fingerprint:
        records = _with_fingerprints(records, args)
    if args.split == "all":
        chosen = records
    else:
        chosen = getattr(split_dataset(records, seed), args.split)
    report = evaluate(model, chosen, dataset=_dataset_name(args), seed=seed)
    log.info("%s on %d %s records: %s = %.6g", model.spec.family, len(chosen), args.split, report.metric, report.value)
    print(report.to_json())
    return {"report": asdict(report), "split": args.split}


def cmd_predict(args, out: Path) -> dict:
    model = _load(args).model
    records = _records(args, model.spec.task)
    if model.spec.needs_fingerprint:
        records = _with_fingerprints(records, args)
    preds = predict(model, records)
    path = out / "predictions.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "prediction"])
        for r, p in zip(records, preds):
            writer.writerow([r.id, repr(float(p))])
    log.info("wrote %d predictions to %s", len(records), path)
    return {"n": len(records), "predictions": str(path)}


COMMANDS = {
    "stats": cmd_stats,
    "encode": cmd_encode,
    "fingerprint": cmd_fingerprint,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chemixnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"chemixnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flags(p, target=True):
        p.add_argument("--data", help="dataset CSV with a header row")
        p.add_argument("--smiles-col", default="smiles")
        p.add_argument("--id-col", default=None)
        if target:
            p.add_argument("--target-col", default=None)
        p.add_argument("--out", default="chemix-out", help="directory for result files and the log")

    def fp_flags(p):
        p.add_argument("--fingerprints", help="sidecar CSV (id,bits) of precomputed fingerprints")
        p.add_argument("--no-compute-fingerprints", action="store_true",
                       help="fail instead of computing fingerprints missing from the sidecar")

    p = sub.add_parser("stats", help="vocabulary size and maximum SMILES length")
    data_flags(p)
    p.add_argument("--task", choices=("regression", "classification"), default="regression")

    p = sub.add_parser("encode", help="one-hot encode SMILES")
    data_flags(p, target=False)
    p.add_argument("--in", dest="smiles", action="append", help="a SMILES string (repeatable)")
    p.add_argument("--max-len", type=int, default=None)

    p = sub.add_parser("fingerprint", help="167-slot key fingerprints from SMILES")
    data_flags(p, target=False)
    p.add_argument("--in", dest="smiles", action="append", help="a SMILES string (repeatable)")

    p = sub.add_parser("train", help="split, train with early stopping, checkpoint, test")
    data_flags(p)
    fp_flags(p)
    p.add_argument("--arch", help="architecture config file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--normalization", choices=("standardize", "none"), default="standardize")
    p.add_argument("--dataset", default=None, help="dataset name for batch-size defaults (default: file stem)")
    p.add_argument("--undersample", action="store_true", help="balance classes before splitting")

    for name, text in (("evaluate", "score a checkpoint on a split"), ("predict", "per-record predictions")):
        p = sub.add_parser(name, help=text)
        data_flags(p)
        fp_flags(p)
        p.add_argument("--checkpoint", help="checkpoint written by train")
        p.add_argument("--dataset", default=None)
        if name == "evaluate":
            p.add_argument("--seed", type=int, default=None, help="split seed (default: the training seed)")
            p.add_argument("--split", choices=("test", "validation", "train", "all"), default="test")
            p.add_argument("--undersample", action="store_true")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"chemixnet: cannot create {out}: {exc}", file=sys.stderr)
        return 1
    _setup_logging(out, args.command)
    try:
        result = COMMANDS[args.command](args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        log.error("%s", exc)
        return 2
    except (ChemixError, OSError, ValueError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        _write_json(out / f"{args.command}.json", {"command": args.command, "status": "error",
                                                    "error": type(exc).__name__, "message": str(exc)})
        return 1
    _write_json(out / f"{args.command}.json", {"command": args.command, "status": "ok", **result})
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
