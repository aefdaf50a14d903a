from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemixnet.errors import InvalidSpec
from chemixnet.model_zoo import (
    FAMILIES,
    ArchitectureSpec,
    FingerprintBranchSpec,
    RecurrentSpec,
    SequenceBranchSpec,
    build_model,
    default_spec,
    family_parts,
    parameter_count,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _inputs(model, batch=3, seed=0):
    rng = np.random.default_rng(seed)
    seq = fp = None
    if model.spec.needs_sequence:
        seq = rng.integers(1, model.vocab_size + 1, size=(batch, model.max_len))
        seq[:, model.max_len // 2 :] = 0
    if model.spec.needs_fingerprint:
        fp = rng.integers(0, 2, size=(batch, model.spec.fingerprint_branch.input_dim)).astype(float)
    return seq, fp


def test_mixed_cnn_widths():
    m = build_model(default_spec("CNN_x_FC"), 23, 83, 0)
    g = m.graph
    assert g["seq/flatten"].shape == (None, 83 * 32)
    assert g["merge"].shape == (None, 83 * 32 + 64)
    seq, fp = _inputs(m, 4)
    assert m.predict(seq, fp).shape == (4,)


def test_fc_parameter_formula():
    spec = default_spec("FC")
    widths = (167, 1024, 512, 256, 64, 64, 1)
    expected = sum(a * b + b for a, b in zip(widths, widths[1:]))
    assert parameter_count(spec, 1, 1) == expected
    assert build_model(spec, 1, 1, 0).parameter_count() == expected


@pytest.mark.parametrize("family", FAMILIES)
def test_every_family_builds_and_predicts(family):
    for task in ("regression", "classification"):
        m = build_model(default_spec(family, task), 7, 12, 1)
        seq, fp = _inputs(m)
        out = m.predict(seq, fp)
        assert out.shape == (3,) and np.isfinite(out).all()
        if task == "classification":
            assert ((out > 0) & (out < 1)).all()
        uses_cnn, uses_rnn, uses_fc = family_parts(family)
        assert m.input_signature == (uses_cnn or uses_rnn, uses_fc)
        assert m.parameter_count() == parameter_count(m.spec, 7, 12)


def test_build_is_deterministic():
    a = build_model(default_spec("CNN_RNN_x_FC"), 9, 10, 5)
    b = build_model(default_spec("CNN_RNN_x_FC"), 9, 10, 5)
    c = build_model(default_spec("CNN_RNN_x_FC"), 9, 10, 6)
    assert all(a.parameters[k].tobytes() == b.parameters[k].tobytes() for k in a.parameters)
    assert any(a.parameters[k].tobytes() != c.parameters[k].tobytes() for k in a.parameters)


@st.composite
def specs(draw):
    family = draw(st.sampled_from(FAMILIES))
    uses_cnn, uses_rnn, uses_fc = family_parts(family)
    small = st.integers(1, 6)
    sb = fb = None
    if uses_cnn or uses_rnn:
        conv = tuple(draw(st.lists(st.tuples(small, small), min_size=1, max_size=2))) if uses_cnn else ()
        rec = RecurrentSpec(draw(st.sampled_from(["gru", "lstm"])), draw(small), draw(st.booleans())) if uses_rnn else None
        sb = SequenceBranchSpec(draw(small), conv, rec)
    if uses_fc:
        fb = FingerprintBranchSpec(tuple(draw(st.lists(small, min_size=1, max_size=3))), draw(small))
    head = tuple(draw(st.lists(small, max_size=2))) + (1,)
    task = draw(st.sampled_from(["regression", "classification"]))
    return ArchitectureSpec(family, task, sb, fb, head)


@settings(max_examples=40)
@given(specs(), st.integers(1, 5), st.integers(1, 6))
def test_parameter_count_matches_built_model(spec, vocab, length):
    assert build_model(spec, vocab, length, 0).parameter_count() == parameter_count(spec, vocab, length)


@settings(max_examples=40)
@given(specs())
def test_arch_text_round_trip(spec):
    assert ArchitectureSpec.from_text(spec.to_text()) == spec


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.cfg")), ids=lambda p: p.stem)
def test_shipped_configs_are_defaults(path):
    spec = ArchitectureSpec.from_text(path.read_text())
    assert spec == default_spec(spec.family)


@pytest.mark.parametrize(
    "text",
    [
        "family = FC\n",
        "chemix-arch v1\nfamily = MLP\n",
        "chemix-arch v1\nfamily = FC\ncolour = blue\n",
        "chemix-arch v1\nfamily = FC\nhead_widths = 64, 2\n",
        "chemix-arch v1\nfamily = CNN\nconv_layers = none\n",
        "chemix-arch v1\nfamily = CNN\nmask_padding = yes\n",
        "chemix-arch v1\nfamily = RNN\nrecurrent = elman 8\n",
        "chemix-arch v1\nfamily = RNN\nmask_padding = maybe\n",
        "chemix-arch v1\nfamily = FC\nfingerprint_widths = 0\n",
        "chemix-arch v1\nfamily = FC\ntask = ranking\n",
        "chemix-arch v1\nfamily\n",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(InvalidSpec):
        ArchitectureSpec.from_text(text)


def test_invalid_specs():
    with pytest.raises(InvalidSpec):
        replace(default_spec("CNN_x_FC"), fingerprint_branch=None)
    with pytest.raises(InvalidSpec):
        replace(default_spec("FC"), sequence_branch=SequenceBranchSpec())
    with pytest.raises(InvalidSpec):
        build_model(default_spec("FC"), 0, 5, 0)


def test_unmasked_recurrent_has_no_mask_input():
    spec = default_spec("RNN")
    spec = replace(spec, sequence_branch=replace(spec.sequence_branch,
                                                 recurrent=replace(spec.sequence_branch.recurrent, masked=False)))
    assert "sequence_mask" not in build_model(spec, 4, 6, 0).graph
    assert "sequence_mask" in build_model(default_spec("RNN"), 4, 6, 0).graph
