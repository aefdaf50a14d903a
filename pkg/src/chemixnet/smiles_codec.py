"""Character vocabularies and fixed-length one-hot encoding of SMILES strings.

Index 0 is reserved for padding. Real characters occupy indices 1..size in
ascending UTF-8 byte order, so the vocabulary does not depend on corpus order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyCorpus, EmptyString, MalformedRow, TooLong, UnknownCharacter

VOCAB_HEADER = "chemix-vocab v1"
PAD_INDEX = 0


def _byte_key(ch: str) -> bytes:
    return ch.encode("utf-8")


@dataclass(frozen=True)
class Vocabulary:
    symbols: tuple[str, ...]
    index_of: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("vocabulary symbols must be unique")
        if any(len(s) != 1 for s in self.symbols):
            raise ValueError("vocabulary symbols must be single characters")
        object.__setattr__(self, "index_of", {s: i + 1 for i, s in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, ch: str) -> bool:
        return ch in self.index_of

    def symbol_at(self, index: int) -> str:
        if not 1 <= index <= self.size:
            raise IndexError(f"index {index} outside 1..{self.size}")
        return self.symbols[index - 1]

    def to_text(self) -> str:
        lines = [f"{VOCAB_HEADER} {self.size}", *self.symbols]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Vocabulary":
        if not text.endswith("\n"):
            raise MalformedRow("vocabulary text must end with a newline")
        lines = text[:-1].split("\n")
        header = lines[0].split(" ")
        if len(header) != 3 or " ".join(header[:2]) != VOCAB_HEADER:
            raise MalformedRow(f"bad vocabulary header: {lines[0]!r}")
        size = int(header[2])
        symbols = lines[1:]
        if len(symbols) != size:
            raise MalformedRow(f"header declares {size} symbols, found {len(symbols)}")
        return cls(tuple(symbols))

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_text().encode("utf-8"))

    @classmethod
    def load(cls, path) -> "Vocabulary":
        return cls.from_text(Path(path).read_bytes().decode("utf-8"))


@dataclass(frozen=True)
class OneHotSequence:
    matrix: np.ndarray  # (max_len, size), 0/1
    true_length: int

    @property
    def max_len(self) -> int:
        return self.matrix.shape[0]


def build_vocabulary(corpus: Iterable[str]) -> Vocabulary:
    corpus = list(corpus)
    if not corpus:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    chars: set[str] = set()
    for i, s in enumerate(corpus):
        if len(s) == 0:
            raise EmptyString(f"corpus entry {i} is empty")
        chars.update(s)
    return Vocabulary(tuple(sorted(chars, key=_byte_key)))


def encode_indices(s: str, vocab: Vocabulary, max_len: int) -> np.ndarray:
    """Integer form of the encoding: vocabulary indices, post-padded with 0."""
    if len(s) > max_len:
        raise TooLong(f"SMILES of length {len(s)} exceeds max_len {max_len}")
    out = np.zeros(max_len, dtype=np.int64)
    for i, ch in enumerate(s):
        try:
            out[i] = vocab.index_of[ch]
        except KeyError:
            raise UnknownCharacter(f"character {ch!r} at position {i} is not in the vocabulary") from None
    return out


def encode_batch(smiles: Sequence[str], vocab: Vocabulary, max_len: int) -> np.ndarray:
    """Stack :func:`encode_indices` over a batch -> (n, max_len) int64."""
    out = np.zeros((len(smiles), max_len), dtype=np.int64)
    for row, s in enumerate(smiles):
        out[row] = encode_indices(s, vocab, max_len)
    return out


def encode_one_hot(s: str, vocab: Vocabulary, max_len: int) -> OneHotSequence:
    idx = encode_indices(s, vocab, max_len)
    matrix = np.zeros((max_len, vocab.size), dtype=np.uint8)
    n = len(s)
    matrix[np.arange(n), idx[:n] - 1] = 1
    return OneHotSequence(matrix=matrix, true_length=n)


def decode_one_hot(seq: OneHotSequence, vocab: Vocabulary) -> str:
    m = np.asarray(seq.matrix)
    if m.ndim != 2 or m.shape[1] != vocab.size:
        raise MalformedRow(f"matrix shape {m.shape} incompatible with vocabulary size {vocab.size}")
    chars = []
    for i in range(seq.true_length):
        row = m[i]
        if row.sum() != 1 or not np.isin(row, (0, 1)).all():
            raise MalformedRow(f"row {i} is not a one-hot indicator")
        chars.append(vocab.symbols[int(np.argmax(row))])
    if m[seq.true_length:].any():
        raise MalformedRow("padding rows must be all zero")
    return "".join(chars)
