"""Dataset ingestion, seeded splitting, class balancing and corpus statistics.

All randomness here goes through :class:`SplitMix64` and a descending
Fisher-Yates shuffle, so a split is a pure function of (records, seed) that
can be reproduced outside Python.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .errors import BadTarget, DuplicateId, EmptyFile, EmptyInput, EmptyString, MissingColumn, NotClassification, TooFewRecords
from .fingerprint import FingerprintVector, fingerprint_smiles
from .smiles_codec import build_vocabulary

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Steele, Lea & Flood's SplitMix64 generator (64-bit state, 64-bit output)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection of the biased tail."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n


def seeded_permutation(n: int, seed: int) -> list[int]:
    """Fisher-Yates: for i = n-1 .. 1, swap a[i] with a[below(i+1)]."""
    rng = SplitMix64(seed)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    smiles: str
    target: float
    fingerprint: FingerprintVector | None = None


@dataclass(frozen=True)
class ColumnSchema:
    smiles: str = "smiles"
    target: str | None = None
    id: str | None = None


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[DatasetRecord, ...]
    validation: tuple[DatasetRecord, ...]
    test: tuple[DatasetRecord, ...]
    seed: int


@dataclass(frozen=True)
class DatasetStats:
    vocab_size: int
    max_sequence_length: int
    record_count: int
    class_balance: float | None = None


def load_dataset(path, schema: ColumnSchema = ColumnSchema(), task: str = "regression") -> list[DatasetRecord]:
    """Read a CSV with a header row. Without an id column, ids are ``row<N>`` (1-based data rows)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise EmptyFile(f"{path}: no header row")
        for col in (schema.smiles, schema.target, schema.id):
            if col is not None and col not in header:
                raise MissingColumn(f"{path}: column {col!r} not found (have {header})")
        records: list[DatasetRecord] = []
        bad: list[int] = []
        seen: set[str] = set()
        for n, row in enumerate(reader, start=1):
            smiles = row[schema.smiles]
            if not smiles:
                raise EmptyString(f"{path}: data row {n} has an empty SMILES")
            rid = row[schema.id] if schema.id else f"row{n}"
            if rid in seen:
                raise DuplicateId(f"{path}: duplicate id {rid!r} at data row {n}")
            seen.add(rid)
            target = math.nan
            if schema.target is not None:
                try:
                    target = float(row[schema.target])
                except (TypeError, ValueError):
                    bad.append(n)
                    continue
                if not math.isfinite(target) or (task == "classification" and target not in (0.0, 1.0)):
                    bad.append(n)
                    continue
            records.append(DatasetRecord(rid, smiles, target))
    if bad:
        shown = ", ".join(map(str, bad[:20])) + (" ..." if len(bad) > 20 else "")
        raise BadTarget(f"{path}: unparseable targets at data rows {shown}")
    if not records:
        raise EmptyFile(f"{path}: no data rows")
    return records


def split_sizes(n: int) -> tuple[int, int, int]:
    """(train, validation, test): test = floor(n/5), validation = floor(rest/10)."""
    test = n // 5
    validation = (n - test) // 10
    return n - test - validation, validation, test


def split_dataset(records: Sequence[DatasetRecord], seed: int) -> DatasetSplit:
    n = len(records)
    if n < 10:
        raise TooFewRecords(f"need at least 10 records to split, got {n}")
    _, n_val, n_test = split_sizes(n)
    perm = seeded_permutation(n, seed)
    test = tuple(records[i] for i in perm[:n_test])
    val = tuple(records[i] for i in perm[n_test : n_test + n_val])
    train = tuple(records[i] for i in perm[n_test + n_val :])
    return DatasetSplit(train, val, test, seed)


def _require_binary(records):
    for r in records:
        if r.target not in (0.0, 1.0):
            raise NotClassification(f"record {r.id!r} has non-binary target {r.target}")


def undersample_majority(records: Sequence[DatasetRecord], seed: int) -> list[DatasetRecord]:
    """Randomly drop majority-class records until both classes are equally large.

    The output keeps the input order.
    """
    _require_binary(records)
    pos = [i for i, r in enumerate(records) if r.target == 1.0]
    neg = [i for i, r in enumerate(records) if r.target == 0.0]
    if len(pos) == len(neg):
        return list(records)
    minority, majority = (pos, neg) if len(pos) < len(neg) else (neg, pos)
    perm = seeded_permutation(len(majority), seed)
    keep = set(minority) | {majority[i] for i in perm[: len(minority)]}
    return [r for i, r in enumerate(records) if i in keep]


def subsample(records: Sequence[DatasetRecord], n: int, seed: int) -> list[DatasetRecord]:
    """Seeded subset of ``n`` records in input order."""
    if n >= len(records):
        return list(records)
    chosen = set(seeded_permutation(len(records), seed)[:n])
    return [r for i, r in enumerate(records) if i in chosen]


def dataset_stats(records: Sequence[DatasetRecord], task: str | None = None) -> DatasetStats:
    if not records:
        raise EmptyInput("no records")
    vocab = build_vocabulary(r.smiles for r in records)
    balance = None
    if task == "classification":
        _require_binary(records)
        balance = sum(r.target == 1.0 for r in records) / len(records)
    return DatasetStats(vocab.size, max(len(r.smiles) for r in records), len(records), balance)


def attach_fingerprints(
    records: Sequence[DatasetRecord],
    sidecar: Mapping[str, FingerprintVector] | None = None,
    compute_missing: bool = True,
) -> list[DatasetRecord]:
    """Attach fingerprints from ``sidecar`` (by id), computing the rest from SMILES if allowed."""
    out = []
    for r in records:
        fp = r.fingerprint
        if sidecar is not None and r.id in sidecar:
            fp = sidecar[r.id]
        elif fp is None and compute_missing:
            fp = fingerprint_smiles(r.smiles)
        out.append(replace(r, fingerprint=fp) if fp is not r.fingerprint else r)
    return out
