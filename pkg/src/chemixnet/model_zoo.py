"""The seven network families and their builder.

Single-representation baselines: FC (fingerprints), CNN, RNN, CNN_RNN (SMILES).
Mixed networks: CNN_x_FC, RNN_x_FC, CNN_RNN_x_FC, where a SMILES branch and a
fingerprint branch run in parallel and their features are concatenated before
a shared dense head.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidSpec
from .fingerprint import N_SLOTS
from .nn import (
    conv1d_same_forward,
    dense_forward,
    embedding_forward,
    init_conv1d,
    init_dense,
    init_embedding,
    init_recurrent,
    loss_node,
    recurrent_forward,
    GATES,
)
from .smiles_codec import PAD_INDEX
from .tensor_engine import ComputeGraph, Node, forward_eval

FAMILIES = ("FC", "CNN", "RNN", "CNN_RNN", "CNN_x_FC", "RNN_x_FC", "CNN_RNN_x_FC")
MIXED_FAMILIES = ("CNN_x_FC", "RNN_x_FC", "CNN_RNN_x_FC")
SINGLE_FAMILIES = ("FC", "CNN", "RNN", "CNN_RNN")
TASKS = ("regression", "classification")
ARCH_HEADER = "chemix-arch v1"


def family_parts(family: str) -> tuple[bool, bool, bool]:
    """(uses_cnn, uses_rnn, uses_fc) for a family name."""
    if family not in FAMILIES:
        raise InvalidSpec(f"unknown family {family!r}; expected one of {FAMILIES}")
    seq = family.removesuffix("_x_FC") if family != "FC" else ""
    return "CNN" in seq, "RNN" in seq, family == "FC" or family.endswith("_x_FC")


@dataclass(frozen=True)
class RecurrentSpec:
    kind: str = "lstm"
    hidden: int = 64
    masked: bool = True  # hold the state over padding positions


@dataclass(frozen=True)
class SequenceBranchSpec:
    embed_dim: int = 32
    conv_layers: tuple[tuple[int, int], ...] = ((32, 3), (32, 3))  # (filters, kernel)
    recurrent: RecurrentSpec | None = None


@dataclass(frozen=True)
class FingerprintBranchSpec:
    widths: tuple[int, ...] = (1024, 512, 256, 64)
    input_dim: int = N_SLOTS


@dataclass(frozen=True)
class ArchitectureSpec:
    family: str
    task: str = "regression"
    sequence_branch: SequenceBranchSpec | None = None
    fingerprint_branch: FingerprintBranchSpec | None = None
    head: tuple[int, ...] = (64, 1)

    def __post_init__(self):
        uses_cnn, uses_rnn, uses_fc = family_parts(self.family)
        if self.task not in TASKS:
            raise InvalidSpec(f"task must be one of {TASKS}, got {self.task!r}")
        if uses_fc != (self.fingerprint_branch is not None):
            raise InvalidSpec(f"{self.family}: fingerprint branch {'required' if uses_fc else 'not allowed'}")
        uses_seq = uses_cnn or uses_rnn
        if uses_seq != (self.sequence_branch is not None):
            raise InvalidSpec(f"{self.family}: sequence branch {'required' if uses_seq else 'not allowed'}")
        sb = self.sequence_branch
        if sb is not None:
            if uses_cnn != bool(sb.conv_layers):
                raise InvalidSpec(f"{self.family}: conv layers {'required' if uses_cnn else 'not allowed'}")
            if uses_rnn != (sb.recurrent is not None):
                raise InvalidSpec(f"{self.family}: recurrent stage {'required' if uses_rnn else 'not allowed'}")
            if sb.recurrent is not None and (sb.recurrent.kind not in GATES or sb.recurrent.hidden < 1):
                raise InvalidSpec(f"bad recurrent stage {sb.recurrent}")
            if sb.embed_dim < 1 or any(f < 1 or k < 1 for f, k in sb.conv_layers):
                raise InvalidSpec("embedding and conv sizes must be positive")
        fb = self.fingerprint_branch
        if fb is not None and (not fb.widths or min(fb.widths) < 1 or fb.input_dim < 1):
            raise InvalidSpec("fingerprint branch widths must be positive")
        if not self.head or self.head[-1] != 1 or min(self.head) < 1:
            raise InvalidSpec(f"head widths must be positive and end in 1, got {self.head}")

    @property
    def needs_sequence(self) -> bool:
        return self.sequence_branch is not None

    @property
    def needs_fingerprint(self) -> bool:
        return self.fingerprint_branch is not None

    @property
    def loss_kind(self) -> str:
        return "bce" if self.task == "classification" else "mse"

    @property
    def metric_kind(self) -> str:
        return "auc" if self.task == "classification" else "mape"

    def to_text(self) -> str:
        lines = [ARCH_HEADER, f"family = {self.family}", f"task = {self.task}"]
        sb = self.sequence_branch
        if sb is not None:
            lines.append(f"embed_dim = {sb.embed_dim}")
            lines.append("conv_layers = " + (", ".join(f"{f}x{k}" for f, k in sb.conv_layers) or "none"))
            rec = "none" if sb.recurrent is None else f"{sb.recurrent.kind} {sb.recurrent.hidden}"
            lines.append(f"recurrent = {rec}")
            if sb.recurrent is not None:
                lines.append(f"mask_padding = {'yes' if sb.recurrent.masked else 'no'}")
        fb = self.fingerprint_branch
        if fb is not None:
            lines.append(f"fingerprint_dim = {fb.input_dim}")
            lines.append("fingerprint_widths = " + ", ".join(map(str, fb.widths)))
        lines.append("head_widths = " + ", ".join(map(str, self.head)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ArchitectureSpec":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or lines[0] != ARCH_HEADER:
            raise InvalidSpec(f"architecture config must start with '{ARCH_HEADER}'")
        kv = {}
        for ln in lines[1:]:
            key, sep, value = ln.partition("=")
            if not sep:
                raise InvalidSpec(f"expected 'key = value', got {ln!r}")
            kv[key.strip()] = value.strip()
        known = {"family", "task", "embed_dim", "conv_layers", "recurrent", "mask_padding", "fingerprint_dim",
                 "fingerprint_widths", "head_widths"}
        if set(kv) - known:
            raise InvalidSpec(f"unknown config keys: {sorted(set(kv) - known)}")
        if "family" not in kv:
            raise InvalidSpec("config is missing 'family'")
        try:
            base = default_spec(kv["family"], kv.get("task", "regression"))
            sb, fb = base.sequence_branch, base.fingerprint_branch
            if sb is not None:
                conv = kv.get("conv_layers")
                if conv is not None:
                    conv_layers = () if conv == "none" else tuple(
                        tuple(int(n) for n in item.strip().split("x")) for item in conv.split(",")
                    )
                else:
                    conv_layers = sb.conv_layers
                rec = kv.get("recurrent")
                if rec is None:
                    recurrent = sb.recurrent
                elif rec == "none":
                    recurrent = None
                else:
                    kind, hidden = rec.split()
                    recurrent = RecurrentSpec(kind, int(hidden))
                masking = kv.get("mask_padding")
                if masking is not None:
                    if masking not in ("yes", "no") or recurrent is None:
                        raise InvalidSpec(f"mask_padding must be yes/no on a recurrent branch, got {masking!r}")
                    recurrent = replace(recurrent, masked=masking == "yes")
                sb = SequenceBranchSpec(int(kv.get("embed_dim", sb.embed_dim)), conv_layers, recurrent)
            if fb is not None:
                widths = kv.get("fingerprint_widths")
                fb = FingerprintBranchSpec(
                    tuple(int(w) for w in widths.split(",")) if widths else fb.widths,
                    int(kv.get("fingerprint_dim", fb.input_dim)),
                )
            head = kv.get("head_widths")
            return replace(
                base,
                sequence_branch=sb,
                fingerprint_branch=fb,
                head=tuple(int(w) for w in head.split(",")) if head else base.head,
            )
        except (ValueError, TypeError) as exc:
            if isinstance(exc, InvalidSpec):
                raise
            raise InvalidSpec(f"malformed architecture config: {exc}") from None


def default_recurrent_kind(family: str) -> str:
    # GRU for the stacked CNN-RNN baseline, LSTM elsewhere.
    return "gru" if family == "CNN_RNN" else "lstm"


def default_spec(family: str, task: str = "regression", recurrent_kind: str | None = None) -> ArchitectureSpec:
    uses_cnn, uses_rnn, uses_fc = family_parts(family)
    sb = None
    if uses_cnn or uses_rnn:
        rec = RecurrentSpec(recurrent_kind or default_recurrent_kind(family), 64) if uses_rnn else None
        sb = SequenceBranchSpec(32, ((32, 3), (32, 3)) if uses_cnn else (), rec)
    fb = FingerprintBranchSpec() if uses_fc else None
    return ArchitectureSpec(family, task, sb, fb)


@dataclass
class ModelInstance:
    graph: ComputeGraph
    spec: ArchitectureSpec
    vocab_size: int
    max_len: int
    output: Node
    loss: Node
    frozen_rows: dict[str, tuple[int, ...]] = field(default_factory=dict)

    @property
    def parameters(self) -> dict[str, np.ndarray]:
        return self.graph.params

    @property
    def input_signature(self) -> tuple[bool, bool]:
        return self.spec.needs_sequence, self.spec.needs_fingerprint

    def bindings(self, sequence=None, fingerprint=None, target=None) -> dict[str, np.ndarray]:
        b = {}
        if self.spec.needs_sequence:
            b["sequence"] = sequence
            if "sequence_mask" in self.graph:
                b["sequence_mask"] = (np.asarray(sequence) != PAD_INDEX).astype(np.float64)
        if self.spec.needs_fingerprint:
            b["fingerprint"] = fingerprint
        if target is not None:
            b["target"] = np.asarray(target, dtype=np.float64).reshape(-1, 1)
        return b

    def predict(self, sequence=None, fingerprint=None) -> np.ndarray:
        values = forward_eval(self.graph, self.bindings(sequence, fingerprint), outputs=[self.output])
        return values[self.output.name][:, 0].copy()

    def parameter_count(self) -> int:
        return self.graph.parameter_count()


def build_model(spec: ArchitectureSpec, vocab_size: int, max_len: int, seed: int) -> ModelInstance:
    if vocab_size < 1 or max_len < 1:
        raise InvalidSpec("vocab_size and max_len must be at least 1")
    rng = np.random.default_rng(seed)
    g = ComputeGraph()
    features: list[Node] = []
    frozen: dict[str, tuple[int, ...]] = {}

    sb = spec.sequence_branch
    if sb is not None:
        seq = g.input("sequence", (None, max_len), dtype="int")
        x = embedding_forward(g, seq, init_embedding(rng, vocab_size, sb.embed_dim), "seq/embedding")
        frozen["seq/embedding/table"] = (0,)
        channels = sb.embed_dim
        for k, (filters, kernel) in enumerate(sb.conv_layers):
            x = conv1d_same_forward(g, x, init_conv1d(rng, kernel, channels, filters), f"seq/conv{k}")
            channels = filters
        if sb.recurrent is not None:
            rec = init_recurrent(rng, sb.recurrent.kind, channels, sb.recurrent.hidden)
            mask = g.input("sequence_mask", (None, max_len)) if sb.recurrent.masked else None
            x = recurrent_forward(g, x, rec, f"seq/{sb.recurrent.kind}", mask=mask)
        else:
            x = g.reshape(x, (-1, max_len * channels), name="seq/flatten")
        features.append(x)

    fb = spec.fingerprint_branch
    if fb is not None:
        x = g.input("fingerprint", (None, fb.input_dim))
        width = fb.input_dim
        for k, units in enumerate(fb.widths):
            x = dense_forward(g, x, init_dense(rng, width, units, "relu"), f"fp/dense{k}")
            width = units
        features.append(x)

    x = g.concat(features, name="merge") if len(features) > 1 else features[0]
    width = x.shape[-1]
    for k, units in enumerate(spec.head):
        last = k == len(spec.head) - 1
        activation = ("sigmoid" if spec.task == "classification" else "linear") if last else "relu"
        x = dense_forward(g, x, init_dense(rng, width, units, activation), f"head/dense{k}")
        width = units
    output = g.affine(x, name="output")
    target = g.input("target", (None, 1))
    loss = loss_node(g, output, target, spec.loss_kind, name="loss")
    return ModelInstance(g, spec, vocab_size, max_len, output, loss, frozen)


def parameter_count(spec: ArchitectureSpec, vocab_size: int, max_len: int) -> int:
    if vocab_size < 1 or max_len < 1:
        raise InvalidSpec("vocab_size and max_len must be at least 1")
    total = 0
    widths = []
    sb = spec.sequence_branch
    if sb is not None:
        total += (vocab_size + 1) * sb.embed_dim
        channels = sb.embed_dim
        for filters, kernel in sb.conv_layers:
            total += kernel * channels * filters + filters
            channels = filters
        if sb.recurrent is not None:
            h = sb.recurrent.hidden
            n = GATES[sb.recurrent.kind] * h
            total += channels * n + h * n + n
            widths.append(h)
        else:
            widths.append(max_len * channels)
    fb = spec.fingerprint_branch
    if fb is not None:
        prev = fb.input_dim
        for units in fb.widths:
            total += prev * units + units
            prev = units
        widths.append(prev)
    prev = sum(widths)
    for units in spec.head:
        total += prev * units + units
        prev = units
    return total
