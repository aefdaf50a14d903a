"""167-slot MACCS-layout fingerprints.

Only the keys listed in ``maccs_keys_v1.tsv`` are computed; every other slot
stays 0. Full-fidelity fingerprints from an external toolkit can be imported
from the fingerprint CSV format (header ``id,bits``).
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DuplicateId, MalformedRow
from .molgraph import (
    AROMATIC,
    ELEMENTS,
    DOUBLE,
    SINGLE,
    TRIPLE,
    MolecularGraph,
    aromatic_ring_count,
    count_cycles_of_length,
    cycle_atom_sets,
    cycle_rank,
    has_cycle_of_length,
    hydrogen_count,
    parse_smiles,
    ring_atoms,
)

N_SLOTS = 167
KEY_TABLE_FILE = "maccs_keys_v1.tsv"
KEY_TABLE_VERSION = "chemix-maccs-keys v1"


@dataclass(frozen=True)
class FingerprintVector:
    bits: np.ndarray  # (167,) uint8
    provenance: str  # "computed" | "imported"

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.shape != (N_SLOTS,):
            raise MalformedRow(f"fingerprint must have {N_SLOTS} slots, got shape {bits.shape}")
        if bits[0] != 0:
            raise MalformedRow("slot 0 is unused and must be 0")
        if not np.isin(bits, (0, 1)).all():
            raise MalformedRow("fingerprint bits must be 0 or 1")
        if self.provenance not in ("computed", "imported"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def to_bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    @classmethod
    def from_bitstring(cls, s: str, provenance: str = "imported") -> "FingerprintVector":
        if len(s) != N_SLOTS or set(s) - {"0", "1"}:
            raise MalformedRow(f"expected {N_SLOTS} characters of 0/1, got {len(s)} characters")
        return cls(np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0"), provenance)

    def __eq__(self, other):
        if not isinstance(other, FingerprintVector):
            return NotImplemented
        return self.provenance == other.provenance and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.provenance, self.bits.tobytes()))


# predicate builders ---------------------------------------------------------

_ORDER_NAMES = {"single": {SINGLE}, "double": {DOUBLE}, "triple": {TRIPLE}, "aromatic": {AROMATIC},
                "any": {SINGLE, DOUBLE, TRIPLE, AROMATIC}}


def _element_in(arg: str):
    wanted = frozenset(arg.split(","))
    return lambda g: any(a.element in wanted for a in g.atoms)


def _element_count_gt(arg: str):
    element, threshold = arg.split(":")
    threshold = int(threshold)
    return lambda g: sum(a.element == element for a in g.atoms) > threshold


def _bond(arg: str):
    pair, order = arg.split(":")
    left, right = pair.split("-")
    orders = _ORDER_NAMES[order]

    def match(el, pattern):
        return pattern == "*" or el == pattern

    def pred(g: MolecularGraph):
        for bd in g.bonds:
            if bd.order not in orders:
                continue
            ea, eb = (g.atoms[k].element for k in bd.endpoints)
            if (match(ea, left) and match(eb, right)) or (match(eb, left) and match(ea, right)):
                return True
        return False

    return pred


def _ring_size(arg: str):
    k = int(arg)
    return lambda g: has_cycle_of_length(g, k)


def _ring_size_count_gt(arg: str):
    k, threshold = (int(x) for x in arg.split(":"))
    return lambda g: count_cycles_of_length(g, k) > threshold


def _ring_element(arg: str):
    def pred(g):
        return any(g.atoms[i].element == arg for i in ring_atoms(g))

    return pred


def _ring_heteroatom(_arg):
    return lambda g: any(g.atoms[i].element not in ("C", "H") for i in ring_atoms(g))


def _aromatic_rings_gt(arg: str):
    threshold = int(arg)
    return lambda g: aromatic_ring_count(g) > threshold


# --- small tree patterns ------------------------------------------------------
#
# A pattern is a SMILES-like tree: atoms are element symbols or A (any), Q (not
# C or H), X (halogen), optionally followed by H (at least one attached
# hydrogen) or Hn (exactly n); parentheses open branches. A bond is a run of:
#   - single   = double   # triple   : aromatic   ~ any order   ^ non-aromatic
#   $ ring bond   ! chain bond
# No order symbol means single or aromatic, unless only $/! are given (any order).

HALOGENS = frozenset({"F", "Cl", "Br", "I", "At"})
_ORDER_SYMBOLS = {"-": {SINGLE}, "=": {DOUBLE}, "#": {TRIPLE}, ":": {AROMATIC},
                  "~": {SINGLE, DOUBLE, TRIPLE, AROMATIC}, "^": {SINGLE, DOUBLE, TRIPLE}}
_BOND_CHARS = set(_ORDER_SYMBOLS) | {"$", "!"}


def _atom_test(token: str, h_spec: str | None):
    if token == "A":
        kind = lambda a: True  # noqa: E731
    elif token == "Q":
        kind = lambda a: a.element not in ("C", "H")  # noqa: E731
    elif token == "X":
        kind = lambda a: a.element in HALOGENS  # noqa: E731
    else:
        kind = lambda a: a.element == token  # noqa: E731
    if h_spec is None:
        return lambda g, i: kind(g.atoms[i])
    exact = int(h_spec) if h_spec else None

    def test(g, i):
        if not kind(g.atoms[i]):
            return False
        h = hydrogen_count(g, i)
        return h >= 1 if exact is None else h == exact

    return test


def _bond_test(token: str):
    orders: set[str] = set()
    for ch in token:
        orders |= _ORDER_SYMBOLS.get(ch, set())
    ring = "$" in token
    chain = "!" in token
    if not orders:
        orders = set(_ORDER_SYMBOLS["~"]) if (ring or chain) else {SINGLE, AROMATIC}

    def test(g: MolecularGraph, i: int, j: int) -> bool:
        pair = frozenset((i, j))
        if g.bond_order[pair] not in orders:
            return False
        if ring or chain:
            return (pair in g.ring_bond_set) == ring
        return True

    return test


@dataclass(frozen=True)
class TreePattern:
    atoms: tuple  # atom tests, in reading order
    parents: tuple  # (parent index, bond test) for atoms[1:]

    @classmethod
    def parse(cls, text: str) -> "TreePattern":
        atoms, parents, stack = [], [], []
        prev, bond, i = None, "", 0
        while i < len(text):
            ch = text[i]
            if ch in _BOND_CHARS:
                bond += ch
                i += 1
            elif ch == "(":
                stack.append(prev)
                i += 1
            elif ch == ")":
                prev = stack.pop()
                i += 1
            else:
                token = text[i : i + 2] if text[i + 1 : i + 2].islower() else ch
                if not (token in ("A", "Q", "X") or token in ELEMENTS):
                    raise ValueError(f"bad pattern atom {token!r} in {text!r}")
                if prev is not None:
                    parents.append((prev, _bond_test(bond)))
                elif atoms:
                    raise ValueError(f"disconnected pattern {text!r}")
                i += len(token)
                h_spec = None
                if text[i : i + 1] == "H":
                    j = i + 1
                    while j < len(text) and text[j].isdigit():
                        j += 1
                    h_spec, i = text[i + 1 : j], j
                atoms.append(_atom_test(token, h_spec))
                prev = len(atoms) - 1
                bond = ""
        if stack or bond:
            raise ValueError(f"unbalanced pattern {text!r}")
        return cls(tuple(atoms), tuple(parents))

    def matches(self, g: MolecularGraph):
        """Yield the atom set of every embedding (atoms mapped injectively)."""
        n = len(self.atoms)
        mapping = [-1] * n

        def extend(k):
            if k == n:
                yield frozenset(mapping)
                return
            parent, bond_ok = self.parents[k - 1]
            anchor = mapping[parent]
            for w in g.neighbors[anchor]:
                if w not in mapping[:k] and self.atoms[k](g, w) and bond_ok(g, anchor, w):
                    mapping[k] = w
                    yield from extend(k + 1)
            mapping[k] = -1

        for v in range(len(g.atoms)):
            if self.atoms[0](g, v):
                mapping[0] = v
                yield from extend(1)

    def count(self, g: MolecularGraph) -> int:
        return len(set(self.matches(g)))


def _pattern(arg: str):
    pat = TreePattern.parse(arg)
    return lambda g: next(pat.matches(g), None) is not None


def _pattern_count_gt(arg: str):
    text, _, threshold = arg.rpartition(":")
    pat, threshold = TreePattern.parse(text), int(threshold)
    return lambda g: pat.count(g) > threshold


def _hetero_ring_size(arg: str):
    k = int(arg)

    def pred(g):
        return any(any(g.atoms[i].element not in ("C", "H") for i in ring) for ring in cycle_atom_sets(g, k))

    return pred


def _ring_heteroatom_count_gt(arg: str):
    threshold = int(arg)
    return lambda g: sum(g.atoms[i].element not in ("C", "H") for i in ring_atoms(g)) > threshold


PREDICATES: dict[str, Callable[[str], Callable[[MolecularGraph], bool]]] = {
    "element_in": _element_in,
    "element_count_gt": _element_count_gt,
    "bond": _bond,
    "ring_size": _ring_size,
    "ring_size_count_gt": _ring_size_count_gt,
    "ring_element": _ring_element,
    "ring_heteroatom": _ring_heteroatom,
    "ring_heteroatom_count_gt": _ring_heteroatom_count_gt,
    "hetero_ring_size": _hetero_ring_size,
    "pattern": _pattern,
    "pattern_count_gt": _pattern_count_gt,
    "aromatic_rings_gt": _aromatic_rings_gt,
    "aromatic_atom": lambda _a: lambda g: any(a.aromatic for a in g.atoms),
    "charged_atom": lambda _a: lambda g: any(a.charge != 0 for a in g.atoms),
    "ring_present": lambda _a: lambda g: cycle_rank(g) >= 1,
    "fragments": lambda _a: lambda g: g.connected_components > 1,
}


@dataclass(frozen=True)
class KeyDefinition:
    key: int
    predicate: str
    description: str
    test: Callable[[MolecularGraph], bool]


def key_table_text() -> str:
    return resources.files(__package__).joinpath(KEY_TABLE_FILE).read_text(encoding="utf-8")


def load_key_table(text: str | None = None) -> tuple[KeyDefinition, ...]:
    text = key_table_text() if text is None else text
    defs = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, predicate, description = line.split("\t")
        name, _, arg = predicate.partition(":")
        if name not in PREDICATES:
            raise ValueError(f"unknown predicate {name!r} for key {key}")
        key = int(key)
        if not 1 <= key < N_SLOTS:
            raise ValueError(f"key {key} outside 1..{N_SLOTS - 1}")
        defs.append(KeyDefinition(key, predicate, description, PREDICATES[name](arg)))
    if len({d.key for d in defs}) != len(defs):
        raise ValueError("duplicate key in key table")
    return tuple(defs)


KEYS = load_key_table()
IMPLEMENTED_KEYS = frozenset(d.key for d in KEYS)


def compute_keys(g: MolecularGraph) -> FingerprintVector:
    bits = np.zeros(N_SLOTS, dtype=np.uint8)
    for d in KEYS:
        if d.test(g):
            bits[d.key] = 1
    return FingerprintVector(bits, "computed")


def fingerprint_smiles(smiles: str) -> FingerprintVector:
    return compute_keys(parse_smiles(smiles))


def import_fingerprints(path) -> dict[str, FingerprintVector]:
    out: dict[str, FingerprintVector] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["id", "bits"]:
            raise MalformedRow(f"fingerprint CSV header must be 'id,bits', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise MalformedRow(f"line {lineno}: expected 2 fields, got {len(row)}")
            rid, bits = row
            if rid in out:
                raise DuplicateId(f"line {lineno}: duplicate id {rid!r}")
            try:
                out[rid] = FingerprintVector.from_bitstring(bits, "imported")
            except MalformedRow as exc:
                raise MalformedRow(f"line {lineno}: {exc}") from None
    return out


def write_fingerprints(path, fingerprints: dict[str, FingerprintVector]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "bits"])
        for rid, fp in fingerprints.items():
            writer.writerow([rid, fp.to_bitstring()])


def key_usage(fingerprints) -> Counter:
    """How many vectors set each slot; handy for checking which keys were live."""
    counts: Counter = Counter()
    for fp in fingerprints:
        counts.update(int(k) for k in np.flatnonzero(fp.bits))
    return counts
