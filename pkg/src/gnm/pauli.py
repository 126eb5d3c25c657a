"""Pauli strings, qubit Hamiltonians and the Jordan-Wigner image of excitations.

Qubit ``q`` of a Pauli string is character ``q`` of its label and bit ``q`` of a
computational basis index.  In bitmask form a string is the pair ``(x, z)``
of ``n``-bit integers and denotes the Hermitian operator
``i**popcount(x & z) * X**x Z**z`` (so ``Y = i X Z``).

Spin-orbitals are interleaved: even index = alpha, odd index = beta.  An
occupied spin-orbital is the qubit state ``|1>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

__all__ = [
    "PauliString",
    "QubitHamiltonian",
    "FermionExcitation",
    "jw_map",
    "expectation",
    "exact_ground_energy",
    "load_hamiltonian",
    "save_hamiltonian",
    "hf_state_index",
]

_LABELS = "IXYZ"
_MAX_EXACT_QUBITS = 12


def popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    ops: str

    def __post_init__(self):
        if not self.ops:
            raise ValueError("PauliString needs at least one qubit")
        bad = set(self.ops) - set(_LABELS)
        if bad:
            raise ValueError(f"invalid Pauli labels {sorted(bad)} in {self.ops!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.ops)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls("I" * n_qubits)

    @classmethod
    def from_masks(cls, x: int, z: int, n_qubits: int) -> PauliString:
        chars = []
        for q in range(n_qubits):
            xb, zb = (x >> q) & 1, (z >> q) & 1
            chars.append("IZXY"[xb * 2 + zb])
        return cls("".join(chars))

    @classmethod
    def from_sparse(cls, terms: dict[int, str], n_qubits: int) -> PauliString:
        chars = ["I"] * n_qubits
        for q, p in terms.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
            chars[q] = p
        return cls("".join(chars))

    @property
    def masks(self) -> tuple[int, int]:
        x = z = 0
        for q, p in enumerate(self.ops):
            if p in "XY":
                x |= 1 << q
            if p in "ZY":
                z |= 1 << q
        return x, z

    @property
    def is_identity(self) -> bool:
        return set(self.ops) == {"I"}

    @property
    def weight(self) -> int:
        return sum(p != "I" for p in self.ops)

    @property
    def support(self) -> list[int]:
        return [q for q, p in enumerate(self.ops) if p != "I"]

    def commutes(self, other: PauliString) -> bool:
        x1, z1 = self.masks
        x2, z2 = other.masks
        return (popcount(x1 & z2) + popcount(z1 & x2)) % 2 == 0

    def __mul__(self, other: PauliString) -> tuple[complex, PauliString]:
        """Operator product, returned as ``(phase, string)``."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit count mismatch")
        x1, z1 = self.masks
        x2, z2 = other.masks
        x, z = x1 ^ x2, z1 ^ z2
        e = popcount(x1 & z1) + popcount(x2 & z2) - popcount(x & z) + 2 * popcount(z1 & x2)
        return 1j ** (e % 4), PauliString.from_masks(x, z, self.n_qubits)

    def to_matrix(self) -> np.ndarray:
        mats = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        out = np.ones((1, 1), dtype=complex)
        # qubit 0 is the least significant bit, so it is the rightmost factor
        for p in self.ops:
            out = np.kron(mats[p], out)
        return out

    def __str__(self) -> str:
        return self.ops


@dataclass(frozen=True)
class FermionExcitation:
    """A single or double excitation ``a^+_a a^+_b ... a_j a_i``."""

    occupied: tuple[int, ...]
    virtual: tuple[int, ...]

    def __post_init__(self):
        occ, vir = tuple(self.occupied), tuple(self.virtual)
        object.__setattr__(self, "occupied", occ)
        object.__setattr__(self, "virtual", vir)
        if len(occ) != len(vir) or len(occ) not in (1, 2):
            raise ValueError(f"excitation must be 1->1 or 2->2, got {occ}->{vir}")
        for idx in (occ, vir):
            if list(idx) != sorted(set(idx)):
                raise ValueError(f"indices must be strictly increasing: {idx}")
            if min(idx) < 0:
                raise ValueError(f"negative spin-orbital index in {idx}")
        if set(occ) & set(vir):
            raise ValueError(f"occupied and virtual overlap: {occ}->{vir}")
        if sum(i % 2 == 0 for i in occ) != sum(a % 2 == 0 for a in vir):
            raise ValueError(f"excitation {occ}->{vir} changes the spin projection")

    @property
    def kind(self) -> str:
        return "single" if len(self.occupied) == 1 else "double"

    @property
    def indices(self) -> tuple[int, ...]:
        return self.occupied + self.virtual

    @property
    def label(self) -> str:
        return "-".join(map(str, self.occupied)) + ">" + "-".join(map(str, self.virtual))

    @classmethod
    def from_label(cls, label: str) -> FermionExcitation:
        occ, vir = label.split(">")
        return cls(tuple(int(i) for i in occ.split("-")), tuple(int(a) for a in vir.split("-")))

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class QubitHamiltonian:
    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...]
    n_electrons: int
    hf_energy: float
    orbital_irreps: tuple[int, ...]
    fci_energy: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(c), p) for c, p in self.terms))
        object.__setattr__(self, "orbital_irreps", tuple(int(i) for i in self.orbital_irreps))
        seen = set()
        for _, p in self.terms:
            if p.n_qubits != self.n_qubits:
                raise ValueError(f"term {p} does not act on {self.n_qubits} qubits")
            if p.ops in seen:
                raise ValueError(f"duplicate Pauli string {p}")
            seen.add(p.ops)
        if len(self.orbital_irreps) != self.n_qubits:
            raise ValueError("need one irrep label per spin-orbital")
        if not 0 <= self.n_electrons <= self.n_qubits:
            raise ValueError("electron count out of range")

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms])

    def with_coefficients(self, coeffs) -> QubitHamiltonian:
        terms = tuple((float(c), p) for c, (_, p) in zip(coeffs, self.terms))
        return QubitHamiltonian(
            self.n_qubits, terms, self.n_electrons, self.hf_energy,
            self.orbital_irreps, self.fci_energy, self.meta,
        )

    def to_matrix(self) -> np.ndarray:
        if self.n_qubits > _MAX_EXACT_QUBITS:
            raise MemoryError(f"dense matrix of {self.n_qubits} qubits is too large")
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        cols = np.arange(dim)
        for c, p in self.terms:
            x, z = p.masks
            phase = 1j ** (popcount(x & z) % 4)
            signs = 1 - 2 * (_parity(cols & z))
            out[cols ^ x, cols] += c * phase * signs
        return out


def _parity(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64).copy()
    out = np.zeros_like(v)
    while np.any(v):
        out ^= v & 1
        v >>= 1
    return out


def hf_state_index(n_electrons: int) -> int:
    """Basis index of the closed-shell reference with spin-orbitals 0..n_e-1 occupied."""
    return (1 << n_electrons) - 1


# -- Jordan-Wigner ---------------------------------------------------------


def _ladder(p: int, n_qubits: int, create: bool) -> dict[str, complex]:
    """JW image of a single ladder operator as ``{label: coeff}``."""
    zs = {q: "Z" for q in range(p)}
    sign = -1j if create else 1j
    x = PauliString.from_sparse({**zs, p: "X"}, n_qubits)
    y = PauliString.from_sparse({**zs, p: "Y"}, n_qubits)
    return {x.ops: 0.5, y.ops: 0.5 * sign}


def _product(a: dict[str, complex], b: dict[str, complex]) -> dict[str, complex]:
    out: dict[str, complex] = {}
    for la, ca in a.items():
        for lb, cb in b.items():
            phase, p = PauliString(la) * PauliString(lb)
            out[p.ops] = out.get(p.ops, 0) + ca * cb * phase
    return out


def jw_map(excitation: FermionExcitation, n_qubits: int) -> list[tuple[float, PauliString]]:
    """Pauli decomposition of ``tau = T - T^dagger``.

    Returns real ``c_k`` with ``tau = i * sum_k c_k P_k``, so that
    ``exp(theta * tau) = prod_k exp(i theta c_k P_k)`` (the strings commute).
    """
    if max(excitation.indices) >= n_qubits:
        raise ValueError(f"excitation {excitation} exceeds {n_qubits} qubits")
    ops = [(a, True) for a in excitation.virtual] + [(i, False) for i in reversed(excitation.occupied)]
    t: dict[str, complex] = {"I" * n_qubits: 1.0}
    for p, create in ops:
        t = _product(t, _ladder(p, n_qubits, create))
    tau: dict[str, complex] = {}
    for label, c in t.items():
        # tau = T - T^dagger; Pauli strings are Hermitian
        tau[label] = tau.get(label, 0) + c - np.conj(c)
    out = []
    for label, c in tau.items():
        if abs(c) < 1e-14:
            continue
        if abs(c.real) > 1e-12:
            raise ArithmeticError(f"generator term {label} is not anti-Hermitian")
        out.append((float(c.imag), PauliString(label)))
    return out


# -- expectation values ------------------------------------------------------


def expectation(hamiltonian: QubitHamiltonian, rho: np.ndarray) -> float:
    """``Tr[H rho]`` for a dense density matrix."""
    rho = np.asarray(rho)
    dim = 1 << hamiltonian.n_qubits
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix shape {rho.shape} does not match {hamiltonian.n_qubits} qubits")
    cols = np.arange(dim)
    total = 0j
    for c, p in hamiltonian.terms:
        x, z = p.masks
        phase = 1j ** (popcount(x & z) % 4)
        signs = 1 - 2 * _parity(cols & z)
        # Tr[P rho] = sum_c <c^x|P|c> rho[c, c^x]
        total += c * phase * np.dot(signs, rho[cols, cols ^ x])
    if abs(total.imag) > 1e-9:
        raise ArithmeticError(f"expectation has imaginary part {total.imag:.3e}")
    return float(total.real)


def sector_basis(n_qubits: int, n_electrons: int | None) -> np.ndarray:
    if n_electrons is None:
        return np.arange(1 << n_qubits)
    states = [sum(1 << q for q in occ) for occ in combinations(range(n_qubits), n_electrons)]
    return np.array(sorted(states), dtype=np.int64)


def exact_ground_energy(hamiltonian: QubitHamiltonian, sector: bool = True) -> float:
    """Lowest eigenvalue, restricted to the ``n_electrons`` sector by default."""
    if hamiltonian.n_qubits > _MAX_EXACT_QUBITS:
        raise MemoryError(f"exact diagonalization limited to {_MAX_EXACT_QUBITS} qubits")
    basis = sector_basis(hamiltonian.n_qubits, hamiltonian.n_electrons if sector else None)
    pos = {int(b): k for k, b in enumerate(basis)}
    m = np.zeros((len(basis), len(basis)), dtype=complex)
    for c, p in hamiltonian.terms:
        x, z = p.masks
        phase = 1j ** (popcount(x & z) % 4)
        for k, b in enumerate(basis):
            tgt = pos.get(int(b) ^ x)
            if tgt is not None:
                m[tgt, k] += c * phase * (-1) ** popcount(int(b) & z)
    return float(np.linalg.eigvalsh(m)[0])


# -- file format -------------------------------------------------------------


def load_hamiltonian(path: str | Path) -> QubitHamiltonian:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return hamiltonian_from_dict(data)


def hamiltonian_from_dict(data: dict) -> QubitHamiltonian:
    if data.get("irrep_product", "xor") != "xor":
        raise ValueError(f"unsupported irrep product rule {data['irrep_product']!r}")
    n = int(data["n_qubits"])
    terms = []
    for t in data["terms"]:
        coeff = t["coeff"]
        if not isinstance(coeff, (int, float)):
            raise ValueError(f"coefficient of {t['pauli']} is not real")
        if len(t["pauli"]) != n:
            raise ValueError(f"term {t['pauli']} has wrong length for {n} qubits")
        terms.append((float(coeff), PauliString(t["pauli"])))
    return QubitHamiltonian(
        n_qubits=n,
        terms=tuple(terms),
        n_electrons=int(data["n_electrons"]),
        hf_energy=float(data["hf_energy"]),
        orbital_irreps=tuple(data["orbital_irreps"]),
        fci_energy=data.get("fci_energy"),
        meta=dict(data.get("meta", {})),
    )


def hamiltonian_to_dict(h: QubitHamiltonian) -> dict:
    out = {
        "n_qubits": h.n_qubits,
        "n_electrons": h.n_electrons,
        "hf_energy": h.hf_energy,
        "orbital_irreps": list(h.orbital_irreps),
        "irrep_product": "xor",
        "terms": [{"coeff": c, "pauli": p.ops} for c, p in h.terms],
        "meta": h.meta,
    }
    if h.fci_energy is not None:
        out["fci_energy"] = h.fci_energy
    return out


def save_hamiltonian(h: QubitHamiltonian, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(hamiltonian_to_dict(h), fh, indent=1)
        fh.write("\n")
