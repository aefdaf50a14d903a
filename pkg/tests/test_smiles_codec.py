import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chemixnet.errors import EmptyCorpus, EmptyString, MalformedRow, TooLong, UnknownCharacter
from chemixnet.smiles_codec import (
    OneHotSequence,
    Vocabulary,
    build_vocabulary,
    decode_one_hot,
    encode_batch,
    encode_one_hot,
)

ALPHABET = "CNOSPFIBrcnos()[]=#@+-123456789%/\\."
smiles_like = st.text(alphabet=ALPHABET, min_size=1, max_size=40)


def test_two_symbol_corpus():
    v = build_vocabulary(["CC", "C=C"])
    assert v.size == 2
    assert set(v.symbols) == {"=", "C"}
    # byte order: '=' (0x3d) before 'C' (0x43)
    assert v.index_of == {"=": 1, "C": 2}


def test_empty_corpus_and_empty_string():
    with pytest.raises(EmptyCorpus):
        build_vocabulary([])
    with pytest.raises(EmptyString):
        build_vocabulary(["CC", ""])


def test_encode_example():
    v = Vocabulary(("C", "="))
    seq = encode_one_hot("CC", v, 4)
    assert seq.matrix.tolist() == [[1, 0], [1, 0], [0, 0], [0, 0]]
    assert seq.true_length == 2 and seq.max_len == 4


def test_encode_empty_string_is_all_zero():
    v = Vocabulary(("C",))
    seq = encode_one_hot("", v, 3)
    assert seq.true_length == 0 and not seq.matrix.any()


def test_encode_errors():
    v = Vocabulary(("C",))
    with pytest.raises(TooLong):
        encode_one_hot("CCC", v, 2)
    with pytest.raises(UnknownCharacter):
        encode_one_hot("CN", v, 5)


def test_decode_examples():
    v = Vocabulary(("C", "="))
    assert decode_one_hot(OneHotSequence(np.array([[1, 0], [0, 1], [0, 0]], dtype=np.uint8), 2), v) == "C="
    assert decode_one_hot(OneHotSequence(np.zeros((3, 2), dtype=np.uint8), 0), v) == ""
    with pytest.raises(MalformedRow):
        decode_one_hot(OneHotSequence(np.array([[1, 1], [0, 0]], dtype=np.uint8), 1), v)


def test_benzene_round_trip():
    v = build_vocabulary(["c1ccccc1", "CCO"])
    assert decode_one_hot(encode_one_hot("c1ccccc1", v, 10), v) == "c1ccccc1"


def test_batch_indices_are_post_padded():
    v = build_vocabulary(["CC", "C=C"])
    batch = encode_batch(["CC", "C=C"], v, 4)
    assert batch.tolist() == [[2, 2, 0, 0], [2, 1, 2, 0]]


def test_vocab_text_round_trip(tmp_path):
    v = build_vocabulary(["Brc1ccccc1", "[Na+].[Cl-]"])
    path = tmp_path / "v.txt"
    v.save(path)
    raw = path.read_bytes()
    assert raw.startswith(f"chemix-vocab v1 {v.size}\n".encode())
    assert b"\r" not in raw
    assert Vocabulary.load(path) == v


@given(st.lists(smiles_like, min_size=1, max_size=8), st.integers(0, 40))
def test_round_trip_and_row_sums(corpus, extra):
    v = build_vocabulary(corpus)
    max_len = max(map(len, corpus)) + extra
    for s in corpus:
        seq = encode_one_hot(s, v, max_len)
        sums = seq.matrix.sum(axis=1)
        assert (sums[: len(s)] == 1).all() and (sums[len(s):] == 0).all()
        assert decode_one_hot(seq, v) == s


@given(st.lists(smiles_like, min_size=1, max_size=8), st.randoms())
def test_vocabulary_is_permutation_invariant(corpus, rnd):
    shuffled = list(corpus)
    rnd.shuffle(shuffled)
    assert build_vocabulary(shuffled) == build_vocabulary(corpus)


@given(st.lists(smiles_like, min_size=1, max_size=8))
def test_index_of_is_bijection(corpus):
    v = build_vocabulary(corpus)
    assert sorted(v.index_of.values()) == list(range(1, v.size + 1))
    assert v.size == len(set("".join(corpus)))
    for ch, i in v.index_of.items():
        assert v.symbol_at(i) == ch
