import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from chemixnet.cli import run
from chemixnet.fingerprint import FingerprintVector

ROOT = Path(__file__).resolve().parents[1]
SMALL_ARCH = "chemix-arch v1\nfamily = FC\nfingerprint_widths = 8\nhead_widths = 4, 1\n"


@pytest.fixture
def toy_csv(tmp_path, data_dir):
    lines = (data_dir / "freesolv.csv").read_text().splitlines()
    p = tmp_path / "toy.csv"
    p.write_text("\n".join(lines[:41]) + "\n")
    return p


def test_fingerprint_single_smiles(tmp_path, capsys):
    assert run(["fingerprint", "--in", "C=C", "--out", str(tmp_path)]) == 0
    bits = capsys.readouterr().out.strip()
    assert len(bits) == 167 and bits[99] == "1" and bits[0] == "0"
    status = json.loads((tmp_path / "fingerprint.json").read_text())
    assert status["status"] == "ok" and status["n"] == 1
    assert (tmp_path / "fingerprints.csv").exists() and (tmp_path / "fingerprint.log").exists()


def test_encode(tmp_path):
    assert run(["encode", "--in", "CCO", "--in", "C", "--out", str(tmp_path)]) == 0
    arr = np.load(tmp_path / "onehot.npz")
    assert arr["onehot"].shape == (2, 3, 2)
    assert arr["lengths"].tolist() == [3, 1]
    assert (tmp_path / "vocab.txt").exists()


def test_stats(tmp_path, capsys, data_dir):
    assert run(["stats", "--data", str(data_dir / "esol.csv"), "--out", str(tmp_path)]) == 0
    assert json.loads(capsys.readouterr().out)["record_count"] == 1128


def test_usage_errors_exit_2(tmp_path):
    assert run(["train", "--out", str(tmp_path)]) == 2
    assert run(["nonsense"]) == 2
    assert run(["stats", "--out", str(tmp_path)]) == 2


def test_data_errors_exit_1(tmp_path, data_dir):
    code = run(["stats", "--data", str(data_dir / "esol.csv"), "--target-col", "nope", "--out", str(tmp_path)])
    assert code == 1
    status = json.loads((tmp_path / "stats.json").read_text())
    assert status["status"] == "error" and status["error"] == "MissingColumn"
    assert run(["stats", "--data", str(tmp_path / "absent.csv"), "--out", str(tmp_path)]) == 1


def test_train_evaluate_predict(tmp_path, toy_csv):
    arch = tmp_path / "fc.cfg"
    arch.write_text(SMALL_ARCH)
    out = tmp_path / "run"
    common = ["--data", str(toy_csv), "--target-col", "calc", "--id-col", "iupac"]
    assert run(["train", *common, "--arch", str(arch), "--epochs", "3", "--out", str(out)]) == 0
    assert (out / "history.csv").read_text().startswith("epoch,train_loss,val_loss,val_metric\n")
    trained = json.loads((out / "train.json").read_text())
    assert trained["report"]["metric"] == "mape" and trained["report"]["n_test"] == 8

    ckpt = str(out / "model.ckpt")
    assert run(["evaluate", *common, "--checkpoint", ckpt, "--out", str(out)]) == 0
    evaluated = json.loads((out / "evaluate.json").read_text())
    assert evaluated["report"]["value"] == trained["report"]["value"]

    assert run(["predict", "--data", str(toy_csv), "--id-col", "iupac", "--checkpoint", ckpt, "--out", str(out)]) == 0
    rows = (out / "predictions.csv").read_text().splitlines()
    assert rows[0] == "id,prediction" and len(rows) == 41


def test_fingerprint_sidecar_strict_mode(tmp_path, toy_csv):
    arch = tmp_path / "fc.cfg"
    arch.write_text(SMALL_ARCH)
    sidecar = tmp_path / "fp.csv"
    sidecar.write_text("id,bits\nnobody," + FingerprintVector(np.zeros(167, dtype=np.uint8), "imported").to_bitstring() + "\n")
    args = ["train", "--data", str(toy_csv), "--target-col", "calc", "--id-col", "iupac", "--arch", str(arch),
            "--epochs", "1", "--fingerprints", str(sidecar), "--no-compute-fingerprints", "--out", str(tmp_path)]
    assert run(args) == 1
    assert json.loads((tmp_path / "train.json").read_text())["error"] == "MissingFingerprints"


def test_console_module_runs(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "chemixnet.cli", "fingerprint", "--in", "c1ccccc1",
                           "--out", str(tmp_path)], capture_output=True, text=True, cwd=ROOT)
    assert proc.returncode == 0
    assert proc.stdout.strip()[165] == "1"
