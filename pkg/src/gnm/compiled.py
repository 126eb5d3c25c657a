"""Compile a noisy circuit into a Pauli-frame program.

Every Clifford gate (H, X, CNOT and rotations by multiples of pi/2) is pushed
to the end of the circuit by conjugation.  What remains is an alternating
sequence of

* Pauli rotations ``exp(-i phi/2 P)`` for the non-Clifford rotations, with
  ``P`` the rotation axis pulled back through the preceding Cliffords, and
* Pauli-diagonal noise channels: a depolarizing channel pulled back through
  a Clifford frame still scales each Pauli ``Q`` by either 1 or its
  depolarizing factor, depending on whether the pulled-back support of ``Q``
  touches the noisy qubits.

The state is carried in the Pauli basis, ``rho = 2**-n sum_Q c_Q Q`` with
``c`` real and indexed by ``x | (z << n)``.  All products of noise factors
inside one segment are accumulated in the log domain as a sparse Walsh
spectrum and expanded with one fast Walsh-Hadamard transform.

The transformation is exact; only floating-point round-off separates it
from gate-by-gate density-matrix propagation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .pauli import QubitHamiltonian, hf_state_index, popcount
from .simulator import Circuit, NoiseSpec

__all__ = ["PauliProgram", "StateProgram", "compile_program", "compile_statevector", "program_for"]

MAX_QUBITS = 11
_HALF_PI = math.pi / 2
# direct multiplication is used for factors whose log is unusable
_LOG_FLOOR = 1e-6


def _mul(a, b):
    x1, z1, p1 = a
    x2, z2, p2 = b
    return x1 ^ x2, z1 ^ z2, (p1 + p2 + 2 * popcount(z1 & x2)) & 3


def _axis(name: str, q: int):
    """Raw ``(x, z, phase)`` with operator ``i**phase X**x Z**z``."""
    bit = 1 << q
    if name == "X":
        return bit, 0, 0
    if name == "Z":
        return 0, bit, 0
    return bit, bit, 1  # Y = i X Z


def _anticommute(a, b) -> bool:
    return (popcount(a[0] & b[1]) + popcount(a[1] & b[0])) & 1 == 1


def _hermitian_sign(p) -> tuple[int, int, int]:
    x, z, ph = p
    e = (ph - popcount(x & z)) & 3
    if e not in (0, 2):
        raise ArithmeticError("frame image is not Hermitian")
    return x, z, 1 if e == 0 else -1


class _Frame:
    """Images ``W^dagger G W`` of the generators under the accumulated Clifford ``W``."""

    def __init__(self, n: int):
        self.n = n
        self.xs = [_axis("X", q) for q in range(n)]
        self.zs = [_axis("Z", q) for q in range(n)]

    def image(self, p):
        x, z, ph = p
        acc = (0, 0, ph)
        q = 0
        while x:
            if x & 1:
                acc = _mul(acc, self.xs[q])
            x >>= 1
            q += 1
        q = 0
        while z:
            if z & 1:
                acc = _mul(acc, self.zs[q])
            z >>= 1
            q += 1
        return acc

    def _conjugated(self, g, qs):
        """Map generator -> raw Pauli ``V^dagger G V`` for the generators on ``qs``."""
        out = {}
        if g.name == "H":
            (q,) = qs
            out[("X", q)] = _axis("Z", q)
            out[("Z", q)] = _axis("X", q)
        elif g.name == "X":
            (q,) = qs
            out[("Z", q)] = (0, 1 << q, 2)
        elif g.name == "CNOT":
            c, t = qs
            out[("X", c)] = _mul(_axis("X", c), _axis("X", t))
            out[("Z", t)] = _mul(_axis("Z", c), _axis("Z", t))
        else:
            (q,) = qs
            k = round(g.angle / _HALF_PI) & 3
            a = _axis(g.name[1], q)
            for lab in "XZ":
                gen = _axis(lab, q)
                if not _anticommute(a, gen):
                    continue
                if k == 2:
                    out[(lab, q)] = (gen[0], gen[1], (gen[2] + 2) & 3)
                elif k in (1, 3):
                    # exp(i phi A) G = i sin(phi) A G for phi = +-pi/2
                    x, z, ph = _mul(a, gen)
                    out[(lab, q)] = (x, z, (ph + (1 if k == 1 else 3)) & 3)
        return out

    def apply_clifford(self, g, qs):
        new = {key: self.image(p) for key, p in self._conjugated(g, qs).items()}
        for (lab, q), img in new.items():
            (self.xs if lab == "X" else self.zs)[q] = img

    def mask(self, p) -> int:
        """Anticommutation mask: ``Q`` anticommutes with ``p`` iff parity(idx(Q) & mask)."""
        return p[1] | (p[0] << self.n)


def _is_clifford(g) -> bool:
    if g.name in ("H", "X", "CNOT"):
        return True
    if g.param is not None:
        return False
    k = g.angle / _HALF_PI
    return abs(k - round(k)) < 1e-12


@dataclass
class _Segment:
    spectrum: dict
    direct: list

    def empty(self) -> bool:
        return not self.spectrum and not self.direct


@dataclass(frozen=True)
class _Rotation:
    px: int
    pz: int
    sign: int
    slot: int | None
    angle: float

    def phi(self, params: Sequence[float]) -> float:
        a = self.angle if self.slot is None else self.angle * params[self.slot]
        return self.sign * a


def _subset_xors(masks):
    out = [(0, 0)]
    for m in masks:
        out += [(x ^ m, k + 1) for x, k in out]
    return out


class _Compiled:
    """Shared frame compilation for the density and state programs."""

    def __init__(self, circuit: Circuit, noise: NoiseSpec, hamiltonian: QubitHamiltonian,
                 initial: int | None, track_noise: bool):
        if hamiltonian.n_qubits > circuit.n_qubits:
            raise ValueError("Hamiltonian acts on more qubits than the circuit register")
        active = sorted(set(range(hamiltonian.n_qubits)) | circuit.used_qubits)
        if len(active) > MAX_QUBITS:
            raise MemoryError(f"{len(active)} active qubits exceed the limit of {MAX_QUBITS}")
        cmap = {q: k for k, q in enumerate(active)}
        n = len(active)
        self.n = n
        self.active = tuple(active)
        self.n_params = circuit.n_params
        if initial is None:
            initial = hf_state_index(hamiltonian.n_electrons)
        self.initial = 0
        for q in range(circuit.n_qubits):
            if (initial >> q) & 1:
                if q not in cmap:
                    raise ValueError(f"initial state occupies inactive qubit {q}")
                self.initial |= 1 << cmap[q]

        frame = _Frame(n)
        rotations: list[_Rotation] = []
        segments = [_Segment({}, [])]
        for g in circuit.gates:
            qs = [cmap[q] for q in g.qubits]
            if _is_clifford(g):
                frame.apply_clifford(g, qs)
            else:
                x, z, s = _hermitian_sign(frame.image(_axis(g.name[1], qs[0])))
                rotations.append(_Rotation(x, z, s, g.param, g.angle))
                segments.append(_Segment({}, []))
            if not track_noise:
                continue
            if g.name == "CNOT":
                p = noise.two_qubit(*g.qubits)
                f = 1.0 - 16.0 * p / 15.0
            else:
                p = noise.one_qubit(g.qubits[0])
                f = 1.0 - 4.0 * p / 3.0
            if p == 0:
                continue
            masks = []
            for q in qs:
                masks.append(frame.mask(frame.xs[q]))
                masks.append(frame.mask(frame.zs[q]))
            seg = segments[-1]
            if f > _LOG_FLOOR:
                # indicator(Q touches the noisy qubits) = 1 - prod_k (1 + chi_k) / 2
                w = math.log(f)
                scale = 0.5 ** len(masks)
                for m, _ in _subset_xors(masks):
                    seg.spectrum[m] = seg.spectrum.get(m, 0.0) + (w if m == 0 else 0.0) - w * scale
            else:
                seg.direct.append((tuple(masks), f))
        self.rotations = tuple(rotations)
        self.segments = segments

        # Hamiltonian pulled back through the final Clifford frame
        idx, weights, terms = [], [], []
        for coeff, pstr in hamiltonian.terms:
            x = z = 0
            for q, lab in enumerate(pstr.ops):
                if lab in "XY":
                    x |= 1 << cmap[q]
                if lab in "ZY":
                    z |= 1 << cmap[q]
            xi, zi, s = _hermitian_sign(frame.image((x, z, popcount(x & z) & 3)))
            idx.append(xi | (zi << n))
            weights.append(coeff * s)
            terms.append((xi, zi))
        self.h_index = np.array(idx, dtype=np.intp)
        self.h_weights = np.array(weights, dtype=float)
        self.h_terms = terms


def _noise_vector(seg: _Segment, n: int) -> np.ndarray | None:
    if seg.empty():
        return None
    size = 1 << (2 * n)
    if seg.spectrum:
        spec = np.zeros(size)
        keys = np.fromiter(seg.spectrum.keys(), dtype=np.int64, count=len(seg.spectrum))
        spec[keys] = np.fromiter(seg.spectrum.values(), dtype=float, count=len(seg.spectrum))
        kernels.fwht(spec)
        d = np.exp(spec)
    else:
        d = np.ones(size)
    if seg.direct:
        from ._kernels_np import parity

        idx = np.arange(size, dtype=np.uint64)
        for masks, f in seg.direct:
            touched = np.zeros(size, dtype=bool)
            for m in masks:
                touched |= parity(idx & np.uint64(m)) == 1
            d[touched] *= f
    return d


def _max_program_bytes() -> int:
    return int(float(os.environ.get("GNM_MAX_PROGRAM_BYTES", 1.5e9)))


class PauliProgram:
    """Exact noisy energy evaluator for one circuit, noise model and Hamiltonian."""

    def __init__(self, circuit: Circuit, noise: NoiseSpec, hamiltonian: QubitHamiltonian,
                 initial: int | None = None):
        comp = _Compiled(circuit, noise, hamiltonian, initial, track_noise=True)
        self.n = comp.n
        self.n_params = comp.n_params
        self.rotations = comp.rotations
        budget = _max_program_bytes()
        nonempty = sum(not s.empty() for s in comp.segments)
        need = nonempty * (8 << (2 * comp.n))
        # tables that do not fit are rebuilt on every evaluation instead
        self.lazy = need > budget
        if self.lazy:
            self.noise = [None if s.empty() else s for s in comp.segments]
        else:
            self.noise = [_noise_vector(s, comp.n) for s in comp.segments]
        axes = {(r.px, r.pz) for r in comp.rotations}
        table_bytes = len(axes) * (5 << (2 * comp.n - 2))
        self._tables = None
        if not self.lazy and need + table_bytes <= budget:
            tables = {ax: kernels.pair_table(comp.n, *ax) for ax in sorted(axes)}
            self._tables = [tables[(r.px, r.pz)] for r in comp.rotations]
        c0 = np.zeros(1 << (2 * comp.n))
        zs = np.arange(1 << comp.n, dtype=np.int64)
        from ._kernels_np import parity

        c0[zs << comp.n] = 1.0 - 2.0 * parity(zs & comp.initial)
        self._c0 = c0
        self._h_index = comp.h_index
        self._h_weights = comp.h_weights

    def _check(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float).ravel()
        if params.shape[0] != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {params.shape[0]}")
        return params

    def _propagate(self, c: np.ndarray, params, start: int, stop: int) -> None:
        for k in range(start, stop):
            self._damp(c, k)
            rot = self.rotations[k]
            phi = rot.phi(params)
            if phi == 0.0:
                continue
            if self._tables is None:
                kernels.rotate(c, self.n, rot.px, rot.pz, math.cos(phi), math.sin(phi))
            else:
                ta, ts = self._tables[k]
                kernels.rotate_table(c, ta, ts, rot.px | (rot.pz << self.n), math.cos(phi), math.sin(phi))

    def _damp(self, c: np.ndarray, k: int) -> None:
        d = self.noise[k]
        if d is None:
            return
        if self.lazy:
            d = _noise_vector(d, self.n)
        c *= d

    def _finish(self, c: np.ndarray) -> float:
        self._damp(c, len(self.rotations))
        return float(np.dot(self._h_weights, c[self._h_index]))

    def pauli_state(self, params) -> np.ndarray:
        params = self._check(params)
        c = self._c0.copy()
        self._propagate(c, params, 0, len(self.rotations))
        self._damp(c, len(self.rotations))
        return c

    def energy(self, params) -> float:
        params = self._check(params)
        c = self._c0.copy()
        self._propagate(c, params, 0, len(self.rotations))
        return self._finish(c)

    def restricted(self, free_slots: Sequence[int], fixed: dict[int, float]):
        """Energy as a function of the free slots only.

        The state after the longest prefix that depends on fixed slots alone
        is computed once and reused.
        """
        free_slots = list(free_slots)
        base = np.zeros(self.n_params)
        for slot, v in fixed.items():
            base[slot] = v
        free = set(free_slots)
        split = len(self.rotations)
        for k, rot in enumerate(self.rotations):
            if rot.slot in free:
                split = k
                break
        prefix = self._c0.copy()
        self._propagate(prefix, base, 0, split)

        def fn(values) -> float:
            params = base.copy()
            params[free_slots] = values
            c = prefix.copy()
            self._propagate(c, params, split, len(self.rotations))
            return self._finish(c)

        return fn


class StateProgram:
    """Noiseless statevector evaluator over the same Pauli frame."""

    def __init__(self, circuit: Circuit, hamiltonian: QubitHamiltonian, initial: int | None = None):
        comp = _Compiled(circuit, NoiseSpec.ideal(), hamiltonian, initial, track_noise=False)
        n = comp.n
        self.n = n
        self.n_params = comp.n_params
        self.rotations = comp.rotations
        basis = np.arange(1 << n, dtype=np.int64)
        from ._kernels_np import parity

        self._ops = []
        for rot in comp.rotations:
            phase = (1j ** (popcount(rot.px & rot.pz) & 3)) * (1.0 - 2.0 * parity(basis & rot.pz))
            self._ops.append((basis ^ rot.px, phase))
        hmat = np.zeros((1 << n, 1 << n), dtype=complex)
        for (x, z), w in zip(comp.h_terms, comp.h_weights):
            phase = (1j ** (popcount(x & z) & 3)) * (1.0 - 2.0 * parity(basis & z))
            hmat[basis ^ x, basis] += w * phase
        self._hmat = hmat
        self._psi0 = np.zeros(1 << n, dtype=complex)
        self._psi0[comp.initial] = 1.0

    def state(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float).ravel()
        if params.shape[0] != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {params.shape[0]}")
        psi = self._psi0.copy()
        for rot, (perm, phase) in zip(self.rotations, self._ops):
            phi = rot.phi(params)
            psi = math.cos(phi / 2) * psi - 1j * math.sin(phi / 2) * (phase * psi)[perm]
        return psi

    def energy(self, params) -> float:
        psi = self.state(params)
        return float(np.vdot(psi, self._hmat @ psi).real)

    def restricted(self, free_slots: Sequence[int], fixed: dict[int, float]):
        free_slots = list(free_slots)
        base = np.zeros(self.n_params)
        for slot, v in fixed.items():
            base[slot] = v

        def fn(values) -> float:
            params = base.copy()
            params[free_slots] = values
            return self.energy(params)

        return fn


def compile_program(circuit: Circuit, noise: NoiseSpec, hamiltonian: QubitHamiltonian,
                    initial: int | None = None) -> PauliProgram:
    return PauliProgram(circuit, noise, hamiltonian, initial)


def compile_statevector(circuit: Circuit, hamiltonian: QubitHamiltonian,
                        initial: int | None = None) -> StateProgram:
    return StateProgram(circuit, hamiltonian, initial)


def program_for(circuit: Circuit, noise: NoiseSpec, hamiltonian: QubitHamiltonian,
                initial: int | None = None):
    """Statevector program for noiseless runs, Pauli-frame program otherwise."""
    if noise.is_ideal:
        return StateProgram(circuit, hamiltonian, initial)
    return PauliProgram(circuit, noise, hamiltonian, initial)
