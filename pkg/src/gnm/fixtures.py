"""Re-verify committed Hamiltonian and device fixtures against the internal oracles."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .ansatz import build_pool
from .pauli import QubitHamiltonian, exact_ground_energy, hf_state_index, load_hamiltonian, popcount
from .transpiler import load_device

__all__ = ["FixtureReport", "check_hamiltonian", "validate_fixtures", "TOLERANCE"]

TOLERANCE = 1e-8
DEFAULT_DIR = Path(__file__).resolve().parents[2] / "fixtures"


@dataclass
class FixtureReport:
    name: str
    ok: bool = True
    problems: list[str] = field(default_factory=list)
    hf_energy: float | None = None
    fci_energy: float | None = None

    def fail(self, msg: str) -> None:
        self.ok = False
        self.problems.append(msg)


def hf_expectation(h: QubitHamiltonian) -> float:
    """Energy of the closed-shell reference: only diagonal strings contribute."""
    occ = hf_state_index(h.n_electrons)
    total = 0.0
    for c, p in h.terms:
        x, z = p.masks
        if x == 0:
            total += c * (-1.0 if popcount(z & occ) % 2 else 1.0)
    return total


def _swap_partner(ops: str) -> str:
    return ops.translate(str.maketrans("XY", "YX"))


def _suspects(h: QubitHamiltonian, hf_gap: float) -> list[str]:
    """Terms whose single-coefficient corruption explains the observed mismatch."""
    coeffs = {p.ops: c for c, p in h.terms}
    out = []
    # real orbitals: swapping X and Y on every qubit leaves the coefficients unchanged
    for ops, c in coeffs.items():
        partner = _swap_partner(ops)
        if partner != ops and abs(coeffs.get(partner, 0.0) - c) > TOLERANCE:
            out.append(f"{ops} ({c!r}) differs from its X/Y partner {partner} ({coeffs.get(partner, 0.0)!r})")
    if out or abs(hf_gap) <= TOLERANCE or h.fci_energy is None:
        return out
    occ = hf_state_index(h.n_electrons)
    for k, (c, p) in enumerate(h.terms):
        x, z = p.masks
        if x:
            continue
        sign = -1.0 if popcount(z & occ) % 2 else 1.0
        fixed = list(h.coefficients)
        fixed[k] = c + sign * hf_gap
        if abs(exact_ground_energy(h.with_coefficients(fixed)) - h.fci_energy) <= TOLERANCE:
            out.append(f"{p.ops} ({c!r}) would need {c + sign * hf_gap!r} to reproduce both reference energies")
    return out


def check_hamiltonian(h: QubitHamiltonian, name: str = "hamiltonian") -> FixtureReport:
    rep = FixtureReport(name)
    e_hf = hf_expectation(h)
    rep.hf_energy = e_hf
    gap = h.hf_energy - e_hf
    if abs(gap) > TOLERANCE:
        rep.fail(f"hf_energy {h.hf_energy!r} but the reference state gives {e_hf!r}")
    if h.n_qubits <= 12:
        fci = exact_ground_energy(h)
        rep.fci_energy = fci
        if h.fci_energy is not None and abs(fci - h.fci_energy) > TOLERANCE:
            rep.fail(f"fci_energy {h.fci_energy!r} but the eigensolver gives {fci!r}")
        if fci > e_hf + TOLERANCE:
            rep.fail(f"ground energy {fci!r} above the reference energy {e_hf!r}")
    expected = h.meta.get("pool_doubles") if isinstance(h.meta, dict) else None
    if expected is not None and h.n_electrons % 2 == 0:
        got = len(build_pool(h).doubles)
        if got != expected:
            rep.fail(f"pool has {got} doubles, metadata records {expected}")
    if not rep.ok:
        for s in _suspects(h, gap):
            rep.problems.append(f"suspect term: {s}")
    return rep


def validate_fixtures(directory: str | Path | None = None) -> list[FixtureReport]:
    """Check every Hamiltonian and device file in ``directory``."""
    directory = Path(directory) if directory is not None else DEFAULT_DIR
    reports = []
    for path in sorted(directory.glob("*.json")):
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            rep = FixtureReport(path.name)
            rep.fail(f"unreadable: {exc}")
            reports.append(rep)
            continue
        if "terms" in doc:
            try:
                reports.append(check_hamiltonian(load_hamiltonian(path), path.name))
            except ValueError as exc:
                rep = FixtureReport(path.name)
                rep.fail(str(exc))
                reports.append(rep)
        elif "coupling" in doc:
            rep = FixtureReport(path.name)
            try:
                load_device(path)
            except (ValueError, KeyError) as exc:
                rep.fail(str(exc))
            reports.append(rep)
    return reports
