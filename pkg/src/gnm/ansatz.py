"""Operator pool, excitation circuits, noise-aware screening and ansatz assembly."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Sequence

from .parallel import pmap
from .pauli import FermionExcitation, QubitHamiltonian, jw_map
from .simulator import Circuit, Gate, NoiseSpec
from .transpiler import DeviceProfile, transpile
from .vqe import OptimizeSpec, energy_at, minimize

__all__ = [
    "OperatorPool",
    "ScreeningRecord",
    "AnsatzSpec",
    "build_pool",
    "excitation_circuit",
    "ops_circuit",
    "screen_doubles",
    "assemble",
    "DEFAULT_EPSILON",
]

DEFAULT_EPSILON = 1e-4


@dataclass(frozen=True)
class OperatorPool:
    doubles: tuple[FermionExcitation, ...]
    singles: tuple[FermionExcitation, ...]


def build_pool(hamiltonian: QubitHamiltonian) -> OperatorPool:
    """All spin-projection conserving doubles and singles out of the closed-shell reference."""
    ne, n = hamiltonian.n_electrons, hamiltonian.n_qubits
    if ne % 2:
        raise ValueError("the operator pool assumes a closed-shell reference")
    occ, vir = range(ne), range(ne, n)

    def sz(idx):
        return sum(1 if i % 2 == 0 else -1 for i in idx)

    doubles = tuple(
        FermionExcitation(o, v)
        for o in combinations(occ, 2)
        for v in combinations(vir, 2)
        if sz(o) == sz(v)
    )
    singles = tuple(FermionExcitation((i,), (a,)) for i in occ for a in vir if i % 2 == a % 2)
    return OperatorPool(doubles, singles)


def excitation_circuit(op: FermionExcitation, slot: int, n_qubits: int) -> Circuit:
    """``exp(theta * tau)`` as a product of Pauli gadgets, all bound to ``slot``."""
    gates: list[Gate] = []
    for coeff, pstr in jw_map(op, n_qubits):
        support = pstr.support
        pre, post = [], []
        for q in support:
            lab = pstr.ops[q]
            if lab == "X":
                pre.append(Gate("H", (q,)))
                post.append(Gate("H", (q,)))
            elif lab == "Y":
                pre.append(Gate("RX", (q,), angle=math.pi / 2))
                post.append(Gate("RX", (q,), angle=-math.pi / 2))
        ladder = [Gate("CNOT", (a, b)) for a, b in zip(support[:-1], support[1:])]
        # exp(i theta c P) = exp(-i (-2 c theta) / 2 P)
        rz = Gate("RZ", (support[-1],), param=slot, angle=-2.0 * coeff)
        gates += pre + ladder + [rz] + ladder[::-1] + post
    return Circuit(n_qubits, gates)


def ops_circuit(ops: Sequence[FermionExcitation], n_qubits: int) -> Circuit:
    """Excitations applied in sequence, slot ``k`` bound to ``ops[k]``."""
    circuit = Circuit(n_qubits, ())
    for op in ops:
        circuit = circuit + excitation_circuit(op, 0, n_qubits)
    return circuit


@dataclass(frozen=True)
class ScreeningRecord:
    op: FermionExcitation
    E_I: float
    E_I0: float
    theta_I: float
    converged: bool
    selected: bool

    @property
    def stabilization(self) -> float:
        return self.E_I0 - self.E_I


def _screen_one(op, hamiltonian, device, noise, epsilon) -> ScreeningRecord:
    tc = transpile(excitation_circuit(op, 0, hamiltonian.n_qubits), device)
    e0 = energy_at(tc.circuit, hamiltonian, noise, [0.0])
    res = minimize(tc.circuit, hamiltonian, noise, OptimizeSpec.all_free(1))
    selected = res.converged and (e0 - res.energy > epsilon)
    return ScreeningRecord(op, res.energy, e0, float(res.theta_star[0]), res.converged, selected)


def screen_doubles(
    pool: OperatorPool,
    hamiltonian: QubitHamiltonian,
    device: DeviceProfile,
    noise: NoiseSpec,
    epsilon: float = DEFAULT_EPSILON,
) -> list[ScreeningRecord]:
    """One-parameter noisy VQE per double; selected iff ``E_I0 - E_I > epsilon``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return pmap(lambda op: _screen_one(op, hamiltonian, device, noise, epsilon), pool.doubles)


@dataclass(frozen=True)
class AnsatzSpec:
    """Operators in application order; slot ``k`` parameterizes ``ops[k]``."""

    ops: tuple[FermionExcitation, ...]
    n_doubles: int
    n_singles: int
    screening: tuple[ScreeningRecord, ...] = ()

    @property
    def slots(self) -> list[int]:
        return list(range(len(self.ops)))

    def circuit(self, n_qubits: int) -> Circuit:
        return ops_circuit(self.ops, n_qubits)

    def to_dict(self) -> dict:
        return {
            "ordered_ops": [{"op": op.label, "slot": k} for k, op in enumerate(self.ops)],
            "N_T": self.n_doubles,
            "M": self.n_singles,
            "screening": [
                {
                    "op": r.op.label,
                    "E_I": r.E_I,
                    "E_I0": r.E_I0,
                    "theta_I": r.theta_I,
                    "converged": r.converged,
                    "selected": r.selected,
                }
                for r in self.screening
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> AnsatzSpec:
        entries = sorted(d["ordered_ops"], key=lambda e: e["slot"])
        if [e["slot"] for e in entries] != list(range(len(entries))):
            raise ValueError("ansatz slots must be consecutive from 0")
        screening = tuple(
            ScreeningRecord(
                FermionExcitation.from_label(r["op"]),
                float(r["E_I"]),
                float(r["E_I0"]),
                float(r["theta_I"]),
                bool(r["converged"]),
                bool(r["selected"]),
            )
            for r in d.get("screening", [])
        )
        return cls(
            tuple(FermionExcitation.from_label(e["op"]) for e in entries),
            int(d["N_T"]),
            int(d["M"]),
            screening,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> AnsatzSpec:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def assemble(records: Sequence[ScreeningRecord], pool: OperatorPool, hamiltonian: QubitHamiltonian) -> AnsatzSpec:
    """Selected doubles by descending stabilization, then the symmetry-allowed singles."""
    chosen = sorted((r for r in records if r.selected), key=lambda r: (-abs(r.stabilization), r.op.indices))
    irreps = hamiltonian.orbital_irreps
    singles = [s for s in pool.singles if irreps[s.occupied[0]] ^ irreps[s.virtual[0]] == 0]
    ops = tuple(r.op for r in chosen) + tuple(singles)
    return AnsatzSpec(ops, len(chosen), len(singles), tuple(records))
