"""Mini-batch training with early stopping, evaluation and checkpoints."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .data_pipeline import DatasetRecord, DatasetSplit
from .errors import (
    CorruptFile,
    MissingFingerprints,
    NonFiniteLoss,
    NonFiniteValue,
    SingleClass,
    VersionMismatch,
    ZeroTarget,
)
from .fingerprint import KEY_TABLE_VERSION
from .model_zoo import ArchitectureSpec, ModelInstance, build_model
from .nn import AdamState, adam_step, compute_metric
from .smiles_codec import Vocabulary, build_vocabulary, encode_batch
from .tensor_engine import backward_gradients, forward_eval

log = logging.getLogger(__name__)

CKPT_HEADER = "chemix-ckpt"
CKPT_VERSION = 1
HISTORY_HEADER = "epoch,train_loss,val_loss,val_metric"

# Default mini-batch size per dataset name.
DATASET_BATCH_SIZES = {"cep": 64, "hiv": 32, "tox21": 32, "esol": 16, "freesolv": 16,
                       "freesolv-exp": 16, "freesolv-comp": 16}


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.001
    batch_size: int = 32
    max_epochs: int = 200
    early_stop_patience: int = 10
    seed: int = 0
    target_normalization: str = "standardize"  # or "none"; ignored for classification

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.target_normalization not in ("standardize", "none"):
            raise ValueError(f"unknown target_normalization {self.target_normalization!r}")


def config_for(dataset: str, **overrides) -> TrainingConfig:
    """Default config for a named dataset (batch size; 25 epochs for CEP, else 200)."""
    key = dataset.lower()
    base = {"batch_size": DATASET_BATCH_SIZES.get(key, 32), "max_epochs": 25 if key == "cep" else 200}
    base.update(overrides)
    return TrainingConfig(**base)


@dataclass(frozen=True)
class Normalization:
    mean: float = 0.0
    std: float = 1.0

    def forward(self, y):
        return (np.asarray(y, dtype=np.float64) - self.mean) / self.std

    def inverse(self, z):
        return np.asarray(z, dtype=np.float64) * self.std + self.mean


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_metric: float


@dataclass
class TrainingHistory:
    epochs: list[EpochRecord] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    initial_train_loss: float = math.nan

    def to_csv(self) -> str:
        rows = [HISTORY_HEADER]
        rows += [f"{e.epoch},{e.train_loss!r},{e.val_loss!r},{e.val_metric!r}" for e in self.epochs]
        return "\n".join(rows) + "\n"

    def save_csv(self, path) -> None:
        Path(path).write_bytes(self.to_csv().encode("utf-8"))


@dataclass(frozen=True)
class EvaluationReport:
    dataset: str
    metric: str
    value: float
    n_test: int
    seed: int | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


# --- featurization ------------------------------------------------------------


def attach_preprocessing(model: ModelInstance, vocabulary: Vocabulary | None,
                         normalization: Normalization | None = None) -> ModelInstance:
    model.vocabulary = vocabulary
    model.normalization = normalization or Normalization()
    return model


def prepare_model(spec: ArchitectureSpec, records: Sequence[DatasetRecord], seed: int) -> ModelInstance:
    """Build a model whose vocabulary and sequence length cover every record of the dataset."""
    vocab = build_vocabulary(r.smiles for r in records)
    max_len = max(len(r.smiles) for r in records)
    model = build_model(spec, vocab.size, max_len, seed)
    return attach_preprocessing(model, vocab)


def featurize(model: ModelInstance, records: Sequence[DatasetRecord]):
    seq = fp = None
    if model.spec.needs_sequence:
        vocab = getattr(model, "vocabulary", None)
        if vocab is None:
            raise ValueError("model has no vocabulary attached; use prepare_model or attach_preprocessing")
        seq = encode_batch([r.smiles for r in records], vocab, model.max_len)
    if model.spec.needs_fingerprint:
        missing = [r.id for r in records if r.fingerprint is None]
        if missing:
            raise MissingFingerprints(f"{len(missing)} records lack fingerprints, e.g. {missing[:3]}")
        fp = np.stack([r.fingerprint.bits for r in records]).astype(np.float64)
    return seq, fp


def _take(arr, idx):
    return None if arr is None else arr[idx]


def _norm(model) -> Normalization:
    return getattr(model, "normalization", None) or Normalization()


def _predict_arrays(model: ModelInstance, seq, fp, n: int, batch_size: int = 256) -> np.ndarray:
    out = np.empty(n)
    for start in range(0, n, batch_size):
        idx = slice(start, start + batch_size)
        out[idx] = model.predict(_take(seq, idx), _take(fp, idx))
    return out


def _loss_arrays(model: ModelInstance, seq, fp, y, batch_size: int = 256) -> float:
    total = 0.0
    n = len(y)
    for start in range(0, n, batch_size):
        idx = slice(start, start + batch_size)
        b = model.bindings(_take(seq, idx), _take(fp, idx), y[idx])
        total += float(forward_eval(model.graph, b, outputs=[model.loss])[model.loss.name]) * len(y[idx])
    return total / n


def predict(model: ModelInstance, records: Sequence[DatasetRecord]) -> np.ndarray:
    """Predictions on the original target scale."""
    seq, fp = featurize(model, records)
    raw = _predict_arrays(model, seq, fp, len(records))
    return raw if model.spec.task == "classification" else _norm(model).inverse(raw)


def evaluate_loss(model: ModelInstance, records: Sequence[DatasetRecord]) -> float:
    """Mean training loss over ``records`` (normalized targets for regression)."""
    seq, fp = featurize(model, records)
    y = np.array([r.target for r in records])
    if model.spec.task == "regression":
        y = _norm(model).forward(y)
    return _loss_arrays(model, seq, fp, y)


def _safe_metric(pred, target, kind) -> float:
    try:
        return compute_metric(pred, target, kind)
    except (ZeroTarget, SingleClass):
        return math.nan


# --- training -----------------------------------------------------------------


def train(model: ModelInstance, split: DatasetSplit, config: TrainingConfig) -> tuple[ModelInstance, TrainingHistory]:
    """Adam on mini-batches; stop after ``early_stop_patience`` epochs without a lower
    validation loss and restore the parameters of the best epoch."""
    train_recs = list(split.train)
    val_recs = list(split.validation) or train_recs
    if not train_recs:
        raise ValueError("training split is empty")
    task = model.spec.task
    y_train = np.array([r.target for r in train_recs])
    y_val = np.array([r.target for r in val_recs])
    if task == "regression" and config.target_normalization == "standardize":
        std = float(y_train.std())
        norm = Normalization(float(y_train.mean()), std if std > 0 else 1.0)
    else:
        norm = Normalization()
    model.normalization = norm
    seq_tr, fp_tr = featurize(model, train_recs)
    seq_va, fp_va = featurize(model, val_recs)
    z_train = norm.forward(y_train) if task == "regression" else y_train
    z_val = norm.forward(y_val) if task == "regression" else y_val

    graph, loss = model.graph, model.loss
    state = AdamState(learning_rate=config.learning_rate, frozen_rows=dict(model.frozen_rows))
    rng = np.random.default_rng(config.seed)
    history = TrainingHistory(initial_train_loss=_loss_arrays(model, seq_tr, fp_tr, z_train))
    best_loss = math.inf
    best_params = {k: v.copy() for k, v in graph.params.items()}
    since_best = 0
    n = len(train_recs)

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for batch_no, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start : start + config.batch_size]
            bindings = model.bindings(_take(seq_tr, idx), _take(fp_tr, idx), z_train[idx])
            try:
                value = float(forward_eval(graph, bindings, outputs=[loss])[loss.name])
            except NonFiniteValue as exc:
                raise NonFiniteLoss(f"epoch {epoch}, batch {batch_no}: {exc}") from exc
            grads = backward_gradients(graph, loss)
            adam_step(graph.params, grads, state)
            total += value * len(idx)
        train_loss = total / n
        val_loss = _loss_arrays(model, seq_va, fp_va, z_val)
        if not math.isfinite(val_loss):
            raise NonFiniteLoss(f"epoch {epoch}: validation loss is {val_loss}")
        val_pred = _predict_arrays(model, seq_va, fp_va, len(val_recs))
        if task == "regression":
            val_pred = norm.inverse(val_pred)
        val_metric = _safe_metric(val_pred, y_val, model.spec.metric_kind)
        history.epochs.append(EpochRecord(epoch, train_loss, val_loss, val_metric))
        log.debug("epoch %d train %.6g val %.6g metric %.6g", epoch, train_loss, val_loss, val_metric)
        history.stopped_epoch = epoch
        if val_loss < best_loss:
            best_loss = val_loss
            history.best_epoch = epoch
            best_params = {k: v.copy() for k, v in graph.params.items()}
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.early_stop_patience:
                break

    for k, v in best_params.items():
        graph.params[k][...] = v
    return model, history


def evaluate(model: ModelInstance, records: Sequence[DatasetRecord], metric_kind: str | None = None,
             dataset: str = "", seed: int | None = None) -> EvaluationReport:
    if not records:
        raise ValueError("no records to evaluate")
    kind = metric_kind or model.spec.metric_kind
    pred = predict(model, records)
    target = np.array([r.target for r in records])
    return EvaluationReport(dataset, kind, compute_metric(pred, target, kind), len(records), seed)


# --- checkpoints ---------------------------------------------------------------


def _section(kind: str, name: str, payload: bytes) -> bytes:
    return f"{kind} {name} {len(payload)}\n".encode("ascii") + payload + b"\n"


def checkpoint_bytes(model: ModelInstance, config: TrainingConfig | None = None, extra: dict | None = None) -> bytes:
    vocab = getattr(model, "vocabulary", None)
    norm = _norm(model)
    meta = {
        "vocab_size": model.vocab_size,
        "max_len": model.max_len,
        "normalization": {"mean": norm.mean, "std": norm.std},
        "config": asdict(config) if config is not None else None,
        "fingerprint_keys": KEY_TABLE_VERSION,
        "extra": extra or {},
    }
    body = bytearray(f"{CKPT_HEADER} v{CKPT_VERSION}\n".encode("ascii"))
    body += _section("section", "arch", model.spec.to_text().encode("utf-8"))
    if vocab is not None:
        body += _section("section", "vocab", vocab.to_text().encode("utf-8"))
    body += _section("section", "meta", json.dumps(meta, sort_keys=True).encode("utf-8"))
    for name in sorted(model.parameters):
        value = model.parameters[name]
        shape = ",".join(map(str, value.shape)) or "scalar"
        payload = value.astype("<f8").tobytes()
        body += f"tensor {name} {shape} {len(payload)}\n".encode("ascii") + payload + b"\n"
    body += f"end {hashlib.sha256(bytes(body)).hexdigest()}\n".encode("ascii")
    return bytes(body)


def save_checkpoint(model: ModelInstance, path, config: TrainingConfig | None = None, extra: dict | None = None) -> None:
    Path(path).write_bytes(checkpoint_bytes(model, config, extra))


@dataclass
class LoadedCheckpoint:
    model: ModelInstance
    config: TrainingConfig | None
    extra: dict


def _read_line(data: bytes, pos: int) -> tuple[str, int]:
    end = data.find(b"\n", pos)
    if end < 0:
        raise CorruptFile("checkpoint truncated")
    try:
        return data[pos:end].decode("ascii"), end + 1
    except UnicodeDecodeError:
        raise CorruptFile("checkpoint header line is not ASCII") from None


def read_checkpoint(path) -> LoadedCheckpoint:
    data = Path(path).read_bytes()
    line, pos = _read_line(data, 0)
    parts = line.split(" ")
    if len(parts) != 2 or parts[0] != CKPT_HEADER or not parts[1].startswith("v") or not parts[1][1:].isdigit():
        raise CorruptFile(f"not a chemixnet checkpoint (header {line[:40]!r})")
    version = int(parts[1][1:])
    if version != CKPT_VERSION:
        raise VersionMismatch(f"checkpoint format v{version}; this build reads v{CKPT_VERSION}")
    sections: dict[str, bytes] = {}
    tensors: dict[str, np.ndarray] = {}
    while True:
        start = pos
        line, pos = _read_line(data, pos)
        fields = line.split(" ")
        if fields[0] == "end":
            if len(fields) != 2 or hashlib.sha256(data[:start]).hexdigest() != fields[1]:
                raise CorruptFile("checkpoint checksum mismatch")
            if pos != len(data):
                raise CorruptFile("trailing bytes after checkpoint end marker")
            break
        try:
            nbytes = int(fields[-1])
        except ValueError:
            raise CorruptFile(f"malformed checkpoint record {line[:60]!r}") from None
        payload = data[pos : pos + nbytes]
        if len(payload) != nbytes or data[pos + nbytes : pos + nbytes + 1] != b"\n":
            raise CorruptFile("checkpoint truncated")
        pos += nbytes + 1
        if fields[0] == "section" and len(fields) == 3:
            sections[fields[1]] = payload
        elif fields[0] == "tensor" and len(fields) == 4:
            shape = () if fields[2] == "scalar" else tuple(int(d) for d in fields[2].split(","))
            tensors[fields[1]] = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(shape)
        else:
            raise CorruptFile(f"unknown checkpoint record {line[:60]!r}")

    try:
        spec = ArchitectureSpec.from_text(sections["arch"].decode("utf-8"))
        meta = json.loads(sections["meta"].decode("utf-8"))
    except KeyError as exc:
        raise CorruptFile(f"checkpoint lacks section {exc}") from None
    vocab = Vocabulary.from_text(sections["vocab"].decode("utf-8")) if "vocab" in sections else None
    model = build_model(spec, meta["vocab_size"], meta["max_len"], seed=0)
    if set(tensors) != set(model.parameters):
        raise CorruptFile("checkpoint parameters do not match the architecture")
    for name, value in tensors.items():
        if value.shape != model.parameters[name].shape:
            raise CorruptFile(f"parameter {name!r} has shape {value.shape}, expected {model.parameters[name].shape}")
        model.parameters[name][...] = value
    attach_preprocessing(model, vocab, Normalization(**meta["normalization"]))
    config = TrainingConfig(**meta["config"]) if meta.get("config") else None
    return LoadedCheckpoint(model, config, meta.get("extra", {}))


def load_checkpoint(path) -> ModelInstance:
    return read_checkpoint(path).model
