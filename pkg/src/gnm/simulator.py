"""Gate circuits and exact depolarizing-noise simulation.

:func:`run` is the literal gate-by-gate density-matrix propagation (one Kraus
sum per noise insertion).  :func:`energy` evaluates the same channel through
the compiled Pauli-frame program of :mod:`gnm.compiled`, which is what every
optimization loop uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .pauli import QubitHamiltonian, expectation, hf_state_index

__all__ = ["Gate", "Circuit", "NoiseSpec", "run", "statevector", "energy", "gate_matrix"]

ONE_QUBIT = ("H", "X", "RX", "RY", "RZ")
ROTATIONS = ("RX", "RY", "RZ")


@dataclass(frozen=True)
class Gate:
    """One gate.  For rotations with a ``param`` slot the applied angle is
    ``angle * params[param]``; otherwise ``angle`` is the literal angle."""

    name: str
    qubits: tuple[int, ...]
    param: int | None = None
    angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.name in ONE_QUBIT:
            if len(self.qubits) != 1:
                raise ValueError(f"{self.name} acts on one qubit, got {self.qubits}")
        elif self.name == "CNOT":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"CNOT needs two distinct qubits, got {self.qubits}")
        else:
            raise ValueError(f"unknown gate {self.name!r}")
        if self.param is not None and self.name not in ROTATIONS:
            raise ValueError(f"{self.name} cannot carry a parameter slot")

    def resolved_angle(self, params: Sequence[float]) -> float:
        if self.param is None:
            return self.angle
        return self.angle * params[self.param]


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    n_params: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        order = []
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits or min(g.qubits) < 0:
                raise ValueError(f"gate {g} outside {self.n_qubits} qubits")
            if g.param is not None and g.param not in order:
                order.append(g.param)
        if order != list(range(len(order))):
            raise ValueError(f"parameter slots must appear in first-use order, got {order}")
        object.__setattr__(self, "n_params", len(order))

    def __add__(self, other: Circuit) -> Circuit:
        """Concatenate; ``other``'s slots are shifted past this circuit's."""
        n = max(self.n_qubits, other.n_qubits)
        shift = self.n_params
        moved = [
            Gate(g.name, g.qubits, None if g.param is None else g.param + shift, g.angle)
            for g in other.gates
        ]
        return Circuit(n, self.gates + tuple(moved))

    @property
    def single_qubit_count(self) -> int:
        return sum(len(g.qubits) == 1 for g in self.gates)

    @property
    def cnot_count(self) -> int:
        return sum(g.name == "CNOT" for g in self.gates)

    @property
    def used_qubits(self) -> set[int]:
        return {q for g in self.gates for q in g.qubits}


@dataclass(frozen=True)
class NoiseSpec:
    """Depolarizing probabilities per qubit (one-qubit gates) and per directed
    edge (CNOT).  ``NoiseSpec.ideal()`` accepts any gate with probability 0."""

    p1: Mapping[int, float] = field(default_factory=dict)
    p2: Mapping[tuple[int, int], float] = field(default_factory=dict)
    ideal_: bool = False

    def __post_init__(self):
        for p in list(self.p1.values()) + list(self.p2.values()):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"depolarizing probability {p} outside [0, 1]")

    @classmethod
    def ideal(cls) -> NoiseSpec:
        return cls({}, {}, ideal_=True)

    @classmethod
    def uniform(cls, n_qubits: int, edges, p1: float, p2: float) -> NoiseSpec:
        pairs = {}
        for a, b in edges:
            pairs[(a, b)] = p2
            pairs[(b, a)] = p2
        return cls({q: p1 for q in range(n_qubits)}, pairs)

    @property
    def is_ideal(self) -> bool:
        if self.ideal_:
            return True
        return all(p == 0 for p in self.p1.values()) and all(p == 0 for p in self.p2.values())

    def one_qubit(self, q: int) -> float:
        if self.ideal_:
            return 0.0
        try:
            return self.p1[q]
        except KeyError:
            raise ValueError(f"no single-qubit error rate for qubit {q}") from None

    def two_qubit(self, c: int, t: int) -> float:
        if self.ideal_:
            return 0.0
        try:
            return self.p2[(c, t)]
        except KeyError:
            raise ValueError(f"no CNOT error rate for edge ({c}, {t})") from None


# -- reference dense simulation --------------------------------------------------

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def gate_matrix(name: str, angle: float = 0.0) -> np.ndarray:
    if name == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if name == "X":
        return _PAULI_MATS["X"].copy()
    if name in ROTATIONS:
        axis = _PAULI_MATS[name[1]]
        return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * axis
    if name == "CNOT":
        m = np.eye(4, dtype=complex)
        m[2:, 2:] = _PAULI_MATS["X"]
        return m
    raise ValueError(f"unknown gate {name!r}")


def _apply_left(t: np.ndarray, u: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    u = u.reshape((2,) * (2 * k))
    out = np.tensordot(u, t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def _apply_right_dagger(t: np.ndarray, u: np.ndarray, axes: list[int]) -> np.ndarray:
    # (rho U^dagger)_{.., c'} = sum_c rho_{.., c} conj(U_{c', c})
    k = len(axes)
    u = u.conj().reshape((2,) * (2 * k))
    out = np.tensordot(t, u, axes=(axes, list(range(k, 2 * k))))
    return np.moveaxis(out, list(range(t.ndim - k, t.ndim)), axes)


def _conjugate(t: np.ndarray, u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    rows = [n - 1 - q for q in qubits]
    cols = [2 * n - 1 - q for q in qubits]
    return _apply_right_dagger(_apply_left(t, u, rows), u, cols)


def _depolarize(t: np.ndarray, qubits: Sequence[int], p: float, n: int) -> np.ndarray:
    if p == 0:
        return t
    labels = [ls for ls in product("IXYZ", repeat=len(qubits)) if set(ls) != {"I"}]
    out = (1 - p) * t
    for ls in labels:
        m = _PAULI_MATS[ls[0]]
        for lab in ls[1:]:
            m = np.kron(m, _PAULI_MATS[lab])
        out = out + (p / len(labels)) * _conjugate(t, m, qubits, n)
    return out


def _check_params(circuit: Circuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=float).ravel()
    if params.shape[0] != circuit.n_params:
        raise ValueError(f"expected {circuit.n_params} parameters, got {params.shape[0]}")
    return params


def run(circuit: Circuit, params, noise: NoiseSpec, initial: int = 0) -> np.ndarray:
    """Dense density matrix after the noisy circuit, starting from basis state ``initial``."""
    params = _check_params(circuit, params)
    n = circuit.n_qubits
    if n > 10:
        raise MemoryError("dense density-matrix reference is limited to 10 qubits")
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[initial, initial] = 1.0
    t = rho.reshape((2,) * (2 * n))
    for g in circuit.gates:
        u = gate_matrix(g.name, g.resolved_angle(params))
        t = _conjugate(t, u, g.qubits, n)
        if g.name == "CNOT":
            p = noise.two_qubit(*g.qubits)
        else:
            p = noise.one_qubit(g.qubits[0])
        t = _depolarize(t, g.qubits, p, n)
    return t.reshape(dim, dim)


def statevector(circuit: Circuit, params, initial: int = 0) -> np.ndarray:
    """Noiseless pure-state evolution; the oracle for noiseless runs."""
    params = _check_params(circuit, params)
    n = circuit.n_qubits
    psi = np.zeros(1 << n, dtype=complex)
    psi[initial] = 1.0
    t = psi.reshape((2,) * n)
    for g in circuit.gates:
        u = gate_matrix(g.name, g.resolved_angle(params))
        t = _apply_left(t, u, [n - 1 - q for q in g.qubits])
    return t.reshape(-1)


def density_energy(circuit: Circuit, params, noise: NoiseSpec, hamiltonian: QubitHamiltonian) -> float:
    """Reference energy from :func:`run`, embedding the Hamiltonian on the circuit's register."""
    initial = hf_state_index(hamiltonian.n_electrons)
    rho = run(circuit, params, noise, initial)
    n, m = circuit.n_qubits, hamiltonian.n_qubits
    if n > m:
        # trace out register qubits the Hamiltonian does not act on (the high ones)
        t = rho.reshape(1 << (n - m), 1 << m, 1 << (n - m), 1 << m)
        rho = np.einsum("aibj,ab->ij", t, np.eye(1 << (n - m)))
    return expectation(hamiltonian, rho)


def energy(circuit: Circuit, params, noise: NoiseSpec, hamiltonian: QubitHamiltonian) -> float:
    """``Tr[H rho(params)]`` starting from the Hartree-Fock state."""
    from .compiled import program_for

    return program_for(circuit, noise, hamiltonian).energy(params)
