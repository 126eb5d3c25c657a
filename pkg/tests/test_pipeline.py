from __future__ import annotations

import json
import subprocess
import sys

import pytest

from gnm import __version__
from gnm.cli import main
from gnm.pipeline import Manifest, InputError, OptimizerFailure, _fmt, read_csv

from .conftest import FIXTURES

STAGES = ("select", "labels", "train", "mitigate")


def write_manifest(tmp_path, **fields):
    doc = {
        "hamiltonian": str(FIXTURES / "h2_0.74.json"),
        "device": str(FIXTURES / "ladder14.json"),
        "noise": {"p1": 0.0, "p2": 0.0},
        "epsilon": 1e-5,
        "seed": 42,
        "oracle": True,
        "output_dir": "out",
    }
    doc.update(fields)
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def run_all(path, *extra):
    return [main([stage, "--manifest", str(path), *extra]) for stage in STAGES]


@pytest.fixture(scope="module")
def h2_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("h2")
    path = write_manifest(tmp)
    assert run_all(path) == [0, 0, 0, 0]
    return tmp / "out"


def test_zero_noise_pipeline(h2_run, h2):
    (row,) = read_csv(h2_run / "result.csv")
    assert abs(float(row["E_pred"]) - h2.fci_energy) < 5e-3
    assert abs(float(row["E_noisy"]) - h2.fci_energy) < 1e-6
    sel = read_csv(h2_run / "screening.csv")
    assert [r["selected"] for r in sel] == ["1"]


def test_zero_noise_labels_equal_noisy(h2_run):
    for row in read_csv(h2_run / "labels.csv"):
        assert abs(float(row["E_srem"]) - float(row["E_noisy"])) < 1e-9


def test_csv_metadata_and_format(h2_run):
    for name in ("screening.csv", "labels.csv", "loss.csv", "result.csv"):
        lines = (h2_run / name).read_text(encoding="utf-8").splitlines()
        assert lines[-1].startswith("# seed=42 input_hash=")
        assert lines[-1].endswith(f"version={__version__}")
    loss = read_csv(h2_run / "loss.csv")
    assert [r["epoch"] for r in loss] == [str(e) for e in range(101)]
    assert _fmt(0.1) == "0.10000000000000001"
    assert _fmt(-1.0) == "-1"


def test_rerun_is_byte_identical(h2_run, tmp_path):
    path = write_manifest(tmp_path)
    assert run_all(path) == [0, 0, 0, 0]
    for name in ("ansatz.json", "screening.csv", "labels.csv", "training.jsonl", "loss.csv", "model.json",
                 "result.csv"):
        assert (tmp_path / "out" / name).read_bytes() == (h2_run / name).read_bytes(), name


def test_empty_selection_exit_code(tmp_path):
    path = write_manifest(tmp_path)
    assert main(["select", "--manifest", str(path), "--epsilon", "1e6"]) == 2
    spec = json.loads((tmp_path / "out" / "ansatz.json").read_text())
    assert spec["ordered_ops"] == [] and spec["N_T"] == 0
    assert main(["labels", "--manifest", str(path)]) == 2


def test_io_errors_exit_code(tmp_path):
    assert main(["select", "--manifest", str(tmp_path / "missing.json")]) == 4
    assert main(["select", "--manifest", str(write_manifest(tmp_path, hamiltonian="nowhere.json"))]) == 4
    path = write_manifest(tmp_path)
    assert main(["labels", "--manifest", str(path)]) == 4
    assert main(["train", "--manifest", str(path)]) == 4


def test_optimizer_failure_exit_code(tmp_path, monkeypatch):
    from gnm import cli

    def boom(manifest):
        raise OptimizerFailure("most snippets failed")

    monkeypatch.setitem(cli.COMMANDS, "labels", boom)
    assert main(["labels", "--manifest", str(write_manifest(tmp_path))]) == 3


def test_manifest_validation(tmp_path):
    with pytest.raises(InputError):
        Manifest.load(write_manifest(tmp_path, label_kind="ideal", oracle=False))
    with pytest.raises(InputError):
        Manifest.load(write_manifest(tmp_path, noise={"p1": 2.0, "p2": 0.0}))
    m = Manifest.load(write_manifest(tmp_path), seed=7, epsilon=None)
    assert m.seed == 7 and m.epsilon == 1e-5
    assert m.output_dir == tmp_path / "out"


def test_scalar_noise_overrides_device(tmp_path):
    m = Manifest.load(write_manifest(tmp_path, noise={"p1": 1e-3, "p2": 1e-2}))
    dev = m.device()
    assert set(dev.t_err.values()) == {1e-2} and set(dev.s_err.values()) == {1e-3}
    assert Manifest.load(write_manifest(tmp_path, noise="device")).device().name == "ladder14"


def test_sweep(tmp_path, h2):
    path = write_manifest(tmp_path, noise={"p1": 1e-4, "p2": 1e-3}, sweep_grid=[[0.0, 0.0], [1e-4, 1e-3], [1e-3, 1e-2]],
                          epochs=20)
    assert main(["sweep-noise", "--manifest", str(path)]) == 0
    rows = read_csv(tmp_path / "out" / "sweep.csv")
    assert [(float(r["p1"]), float(r["p2"])) for r in rows] == [(0.0, 0.0), (1e-4, 1e-3), (1e-3, 1e-2)]
    errs = [float(r["E_noisy"]) - float(r["E_ideal"]) for r in rows]
    assert abs(errs[0]) < 1e-6 and 0 < errs[1] < errs[2]
    assert abs(float(rows[0]["E_pred"]) - h2.fci_energy) < 5e-3


def test_installed_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "gnm.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "sweep-noise" in out.stdout
