from __future__ import annotations

import json
import shutil

import pytest

from gnm.fixtures import TOLERANCE, check_hamiltonian, hf_expectation, validate_fixtures
from gnm.pauli import PauliString, QubitHamiltonian, load_hamiltonian

from .conftest import FIXTURES


def test_committed_fixtures_pass():
    reports = validate_fixtures(FIXTURES)
    names = {r.name for r in reports}
    assert {"h2_0.74.json", "h2_2.00.json", "h4_1.00.json", "h4_2.00.json", "bh_1.23.json", "ladder14.json",
            "heavyhex16.json"} <= names
    bad = [(r.name, r.problems) for r in reports if not r.ok]
    assert not bad


@pytest.mark.parametrize("name", ["h2_0.74", "h2_2.00", "h4_1.00", "h4_2.00", "bh_1.23", "bh_2.50"])
def test_variational_bound(name):
    rep = check_hamiltonian(load_hamiltonian(FIXTURES / f"{name}.json"), name)
    assert rep.fci_energy <= rep.hf_energy + TOLERANCE
    if name.endswith(("2.00", "2.50")):
        assert rep.fci_energy < rep.hf_energy - 1e-3


def _corrupt(tmp_path, label, delta):
    shutil.copy(FIXTURES / "h4_1.00.json", tmp_path / "h4_1.00.json")
    doc = json.loads((tmp_path / "h4_1.00.json").read_text())
    for t in doc["terms"]:
        if t["pauli"] == label:
            t["coeff"] += delta
            break
    else:
        raise AssertionError(label)
    (tmp_path / "h4_1.00.json").write_text(json.dumps(doc))
    (rep,) = validate_fixtures(tmp_path)
    return rep


def test_corrupted_diagonal_term_is_localized(tmp_path):
    rep = _corrupt(tmp_path, "IIIIZIII", 1e-3)
    assert not rep.ok
    assert any("suspect term: IIIIZIII" in p for p in rep.problems)


def test_corrupted_exchange_term_is_localized(tmp_path):
    h = load_hamiltonian(FIXTURES / "h4_1.00.json")
    label = next(p.ops for _, p in h.terms if "Y" in p.ops and p.ops.count("Y") == 2 and "X" not in p.ops)
    rep = _corrupt(tmp_path, label, 1e-3)
    assert not rep.ok
    assert any(label in p for p in rep.problems if p.startswith("suspect"))


def test_identity_only_hamiltonian():
    c = -0.8125
    h = QubitHamiltonian(2, ((c, PauliString("II")),), 1, c, (0, 0), c)
    rep = check_hamiltonian(h)
    assert rep.ok and rep.hf_energy == c and rep.fci_energy == pytest.approx(c, abs=1e-15)
    assert hf_expectation(h) == c


def test_unreadable_file_reported(tmp_path):
    (tmp_path / "broken.json").write_text("{not json")
    (rep,) = validate_fixtures(tmp_path)
    assert not rep.ok and "unreadable" in rep.problems[0]


def test_pool_metadata_checked(tmp_path):
    doc = json.loads((FIXTURES / "h2_0.74.json").read_text())
    doc["meta"]["pool_doubles"] = 5
    (tmp_path / "h2.json").write_text(json.dumps(doc))
    (rep,) = validate_fixtures(tmp_path)
    assert not rep.ok and "pool has 1 doubles" in rep.problems[0]
