"""SMILES -> molecular graph.

Supports the organic subset (B C N O P S F Cl Br I and aromatic b c n o p s),
bracket atoms with isotope, element, chirality, H-count and charge, the bond
symbols ``- = # :``, stereo bonds ``/ \\`` (read as unspecified bonds), ring
closures ``0-9`` and ``%nn``, branches and ``.`` disconnections. Aromaticity is
taken from lowercase notation only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

from .errors import EmptyInput, UnbalancedParenthesis, UnknownToken, UnmatchedRingClosure

SINGLE, DOUBLE, TRIPLE, AROMATIC = "single", "double", "triple", "aromatic"
BOND_SYMBOLS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC}
STEREO_BONDS = "/\\"

ELEMENTS = frozenset(
    """H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu
    Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba
    La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi
    Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh Hs Mt Ds
    Rg Cn Nh Fl Mc Lv Ts Og""".split()
)
ORGANIC = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
AROMATIC_ORGANIC = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
AROMATIC_BRACKET = {"se": "Se", "as": "As", "te": "Te", **AROMATIC_ORGANIC}


@dataclass(frozen=True)
class Atom:
    element: str
    aromatic: bool
    charge: int
    index: int
    bracket_h: int | None = None  # H count written inside [...]; None for organic-subset atoms


@dataclass(frozen=True)
class Bond:
    endpoints: tuple[int, int]
    order: str


@dataclass(frozen=True)
class MolecularGraph:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    connected_components: int

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in self.atoms]
        for b in self.bonds:
            i, j = b.endpoints
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def bond_order(self) -> dict[frozenset[int], str]:
        return {frozenset(b.endpoints): b.order for b in self.bonds}

    @cached_property
    def ring_bond_set(self) -> frozenset[frozenset[int]]:
        return ring_bonds(self)

    def dump(self) -> str:
        """Debug listing: one line per atom, then one line per bond."""
        lines = [f"atom {a.index} {a.element} aromatic={int(a.aromatic)} charge={a.charge}" for a in self.atoms]
        lines += [f"bond {b.endpoints[0]} {b.endpoints[1]} {b.order}" for b in self.bonds]
        return "\n".join(lines) + "\n"


class _Builder:
    def __init__(self):
        self.atoms: list[Atom] = []
        self.bonds: list[Bond] = []
        self.pairs: set[frozenset[int]] = set()

    def add_atom(self, element, aromatic, charge, bracket_h=None) -> int:
        idx = len(self.atoms)
        self.atoms.append(Atom(element, aromatic, charge, idx, bracket_h))
        return idx

    def add_bond(self, i: int, j: int, symbol: str | None, pos: int) -> None:
        if i == j:
            raise UnknownToken("ring closure bonds an atom to itself", pos)
        key = frozenset((i, j))
        if key in self.pairs:
            raise UnknownToken(f"duplicate bond between atoms {i} and {j}", pos)
        self.pairs.add(key)
        if symbol is None or symbol in STEREO_BONDS:
            both_aromatic = self.atoms[i].aromatic and self.atoms[j].aromatic
            order = AROMATIC if both_aromatic else SINGLE
        else:
            order = BOND_SYMBOLS[symbol]
        self.bonds.append(Bond((i, j), order))


def _parse_bracket(s: str, start: int) -> tuple[str, bool, int, int, int]:
    """Parse ``[...]`` beginning at ``s[start] == '['``.

    Returns (element, aromatic, charge, hydrogen count, index just past ']').
    """
    end = s.find("]", start)
    if end < 0:
        raise UnknownToken("unterminated bracket atom", start)
    body = s[start + 1 : end]
    i = 0
    while i < len(body) and body[i].isdigit():  # isotope, ignored
        i += 1
    element = None
    aromatic = False
    for width in (2, 1):
        sym = body[i : i + width]
        if len(sym) == width:
            if sym in AROMATIC_BRACKET:
                element, aromatic = AROMATIC_BRACKET[sym], True
            elif sym[0].isupper() and sym in ELEMENTS:
                element = sym
            if element is not None:
                i += width
                break
    if element is None:
        raise UnknownToken(f"unrecognized bracket atom [{body}]", start)
    while i < len(body) and body[i] == "@":  # chirality, ignored
        i += 1
    h_count = 0
    if i < len(body) and body[i] == "H":
        i += 1
        j = i
        while i < len(body) and body[i].isdigit():
            i += 1
        h_count = int(body[j:i]) if i > j else 1
    charge = 0
    if i < len(body) and body[i] in "+-":
        sign = 1 if body[i] == "+" else -1
        j = i + 1
        while j < len(body) and body[j] == body[i]:
            j += 1
        if j > i + 1:
            charge = sign * (j - i)
            i = j
        else:
            k = j
            while k < len(body) and body[k].isdigit():
                k += 1
            charge = sign * (int(body[j:k]) if k > j else 1)
            i = k
    if i != len(body):
        raise UnknownToken(f"unsupported bracket atom content [{body}]", start)
    return element, aromatic, charge, h_count, end + 1


def _count_components(n: int, bonds: list[Bond]) -> int:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for b in bonds:
        ri, rj = find(b.endpoints[0]), find(b.endpoints[1])
        if ri != rj:
            parent[ri] = rj
            comps -= 1
    return comps


def parse_smiles(s: str) -> MolecularGraph:
    # Whitespace terminates a SMILES string; trailing blanks occur in real data files.
    s = s.rstrip()
    if not s:
        raise EmptyInput("empty SMILES string")
    b = _Builder()
    prev: int | None = None
    pending: str | None = None
    pending_pos = 0
    branches: list[tuple[int, int]] = []
    rings: dict[int, tuple[int, str | None, int]] = {}
    i = 0
    n = len(s)

    def attach(idx: int):
        nonlocal prev, pending
        if prev is not None:
            b.add_bond(prev, idx, pending, i)
        elif pending is not None:
            raise UnknownToken("bond symbol without a preceding atom", pending_pos)
        pending = None
        prev = idx

    while i < n:
        ch = s[i]
        if ch == "[":
            element, aromatic, charge, h_count, nxt = _parse_bracket(s, i)
            attach(b.add_atom(element, aromatic, charge, h_count))
            i = nxt
        elif s.startswith(("Cl", "Br"), i):
            attach(b.add_atom(s[i : i + 2], False, 0))
            i += 2
        elif ch in ORGANIC:
            attach(b.add_atom(ch, False, 0))
            i += 1
        elif ch in AROMATIC_ORGANIC:
            attach(b.add_atom(AROMATIC_ORGANIC[ch], True, 0))
            i += 1
        elif ch in BOND_SYMBOLS or ch in STEREO_BONDS:
            if pending is not None:
                raise UnknownToken("two consecutive bond symbols", i)
            if prev is None:
                raise UnknownToken("bond symbol without a preceding atom", i)
            pending, pending_pos = ch, i
            i += 1
        elif ch.isdigit() or ch == "%":
            if prev is None:
                raise UnknownToken("ring closure without a preceding atom", i)
            if ch == "%":
                digits = s[i + 1 : i + 3]
                if len(digits) != 2 or not digits.isdigit():
                    raise UnknownToken("'%' must be followed by two digits", i)
                label, width = int(digits), 3
            else:
                label, width = int(ch), 1
            if label in rings:
                other, sym, _ = rings.pop(label)
                if sym is not None and pending is not None and sym != pending:
                    raise UnknownToken(f"conflicting bond symbols on ring closure {label}", i)
                b.add_bond(other, prev, pending if pending is not None else sym, i)
            else:
                rings[label] = (prev, pending, i)
            pending = None
            i += width
        elif ch == "(":
            if prev is None:
                raise UnknownToken("branch without a preceding atom", i)
            if pending is not None:
                raise UnknownToken("bond symbol before '('", pending_pos)
            branches.append((prev, i))
            i += 1
        elif ch == ")":
            if not branches:
                raise UnbalancedParenthesis("')' without matching '('", i)
            if pending is not None:
                raise UnknownToken("dangling bond symbol before ')'", pending_pos)
            prev, _ = branches.pop()
            i += 1
        elif ch == ".":
            if pending is not None:
                raise UnknownToken("dangling bond symbol before '.'", pending_pos)
            if branches:
                raise UnbalancedParenthesis("'.' inside an open branch", i)
            prev = None
            i += 1
        else:
            raise UnknownToken(f"unexpected character {ch!r}", i)

    if branches:
        raise UnbalancedParenthesis("unclosed '('", branches[-1][1])
    if rings:
        label, (_, _, pos) = min(rings.items())
        raise UnmatchedRingClosure(f"ring label {label} opened but never closed", pos)
    if pending is not None:
        raise UnknownToken("dangling bond symbol at end of input", pending_pos)

    return MolecularGraph(tuple(b.atoms), tuple(b.bonds), _count_components(len(b.atoms), b.bonds))


def cycle_rank(g: MolecularGraph) -> int:
    return len(g.bonds) - len(g.atoms) + g.connected_components


def aromatic_ring_count(g: MolecularGraph) -> int:
    """Cycle rank of the subgraph made of aromatic bonds and their endpoints."""
    arom = [bd for bd in g.bonds if bd.order == AROMATIC]
    if not arom:
        return 0
    verts = sorted({v for bd in arom for v in bd.endpoints})
    remap = {v: k for k, v in enumerate(verts)}
    sub = [Bond((remap[bd.endpoints[0]], remap[bd.endpoints[1]]), bd.order) for bd in arom]
    return len(sub) - len(verts) + _count_components(len(verts), sub)


def ring_bonds(g: MolecularGraph) -> frozenset[frozenset[int]]:
    """Bonds lying on at least one cycle (i.e. bonds that are not bridges)."""
    n = len(g.atoms)
    disc = [-1] * n
    low = [0] * n
    bridges: set[frozenset[int]] = set()
    timer = 0
    adj = g.neighbors
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w == parent:
                    continue
                if disc[w] == -1:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, v, iter(adj[w])))
                    advanced = True
                    break
                low[v] = min(low[v], disc[w])
            if not advanced:
                stack.pop()
                if parent != -1:
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent]:
                        bridges.add(frozenset((parent, v)))
    return frozenset(frozenset(bd.endpoints) for bd in g.bonds) - bridges


def ring_atoms(g: MolecularGraph) -> frozenset[int]:
    return frozenset(v for pair in ring_bonds(g) for v in pair)


def _cycles_of_length(g: MolecularGraph, k: int) -> Iterator[frozenset[int]]:
    adj = g.neighbors
    for start in range(len(g.atoms)):
        path = [start]
        on_path = {start}

        def extend(v):
            if len(path) == k:
                if start in adj[v] and k >= 3:
                    yield frozenset(path)
                return
            for w in adj[v]:
                if w > start and w not in on_path:
                    path.append(w)
                    on_path.add(w)
                    yield from extend(w)
                    path.pop()
                    on_path.discard(w)

        yield from extend(start)


# Normal valences of the organic subset, used to fill in implicit hydrogens.
_VALENCES = {"B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5), "S": (2, 4, 6),
             "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,)}
_BOND_VALENCE = {SINGLE: 1, DOUBLE: 2, TRIPLE: 3, AROMATIC: 1}


def hydrogen_count(g: MolecularGraph, i: int) -> int:
    """Attached hydrogens: the bracket count, or the organic-subset implicit count.

    Implicit H fills the bond-order sum up to the smallest normal valence that
    accommodates it; an aromatic atom spends one extra unit on the pi system.
    """
    atom = g.atoms[i]
    if atom.bracket_h is not None:
        return atom.bracket_h
    valences = _VALENCES.get(atom.element)
    if valences is None:
        return 0
    used = sum(_BOND_VALENCE[g.bond_order[frozenset((i, j))]] for j in g.neighbors[i]) + int(atom.aromatic)
    for v in valences:
        if v >= used:
            return v - used
    return 0


def cycle_atom_sets(g: MolecularGraph, k: int) -> frozenset[frozenset[int]]:
    """Distinct atom sets that form a simple cycle of exactly ``k`` atoms."""
    return frozenset(_cycles_of_length(g, k))


def count_cycles_of_length(g: MolecularGraph, k: int) -> int:
    return len(cycle_atom_sets(g, k))


def has_cycle_of_length(g: MolecularGraph, k: int) -> bool:
    return next(_cycles_of_length(g, k), None) is not None
