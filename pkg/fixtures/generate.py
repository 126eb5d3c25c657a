"""Regenerate the committed Hamiltonian and device fixtures.

Needs pyscf, which the package itself never imports.  Run from the repo root:

    python fixtures/generate.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
from pyscf import gto, mcscf, scf

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent / "src"))

from gnm.pauli import (  # noqa: E402
    PauliString,
    QubitHamiltonian,
    exact_ground_energy,
    expectation,
    hf_state_index,
    popcount,
    save_hamiltonian,
)

MOLECULES = {
    "h2_0.74": ("H2", [("H", 0.0), ("H", 0.74)], None),
    "h2_2.00": ("H2", [("H", 0.0), ("H", 2.0)], None),
    "h4_1.00": ("H4", [("H", 1.0 * k) for k in range(4)], None),
    "h4_2.00": ("H4", [("H", 2.0 * k) for k in range(4)], None),
    "bh_1.23": ("BH", [("B", 0.0), ("H", 1.23)], 1),
    "bh_2.50": ("BH", [("B", 0.0), ("H", 2.5)], 1),
}


def ladder(p: int, create: bool) -> dict[tuple[int, int], complex]:
    """JW image of a ladder operator, keyed by (x, z) masks with the i^{|x&z|} convention."""
    zchain = (1 << p) - 1
    x = 1 << p
    # X_p Z_chain and Y_p Z_chain; Y = i X Z so Y Zchain has masks (x, zchain | x)
    return {(x, zchain): 0.5, (x, zchain | x): (-0.5j if create else 0.5j)}


def mul(a, b):
    out = {}
    for (x1, z1), c1 in a.items():
        for (x2, z2), c2 in b.items():
            x, z = x1 ^ x2, z1 ^ z2
            e = popcount(x1 & z1) + popcount(x2 & z2) - popcount(x & z) + 2 * popcount(z1 & x2)
            out[(x, z)] = out.get((x, z), 0) + c1 * c2 * 1j ** (e % 4)
    return out


def add_into(acc, term, scale):
    for key, c in term.items():
        acc[key] = acc.get(key, 0) + scale * c


def qubit_hamiltonian(h1, h2, ecore):
    """Interleaved-spin JW image of sum h1 a+a + 1/2 sum (pq|rs) a+_p a+_r a_s a_q."""
    norb = h1.shape[0]
    nq = 2 * norb
    cre = [ladder(p, True) for p in range(nq)]
    des = [ladder(p, False) for p in range(nq)]
    acc: dict = {(0, 0): ecore}
    for p in range(nq):
        for q in range(nq):
            if p % 2 != q % 2:
                continue
            v = h1[p // 2, q // 2]
            if abs(v) > 1e-12:
                add_into(acc, mul(cre[p], des[q]), v)
    pair_cache = {}
    for p in range(nq):
        for q in range(nq):
            if p % 2 != q % 2:
                continue
            for r in range(nq):
                for s in range(nq):
                    if r % 2 != s % 2 or p == r or q == s:
                        continue
                    v = h2[p // 2, q // 2, r // 2, s // 2]
                    if abs(v) < 1e-12:
                        continue
                    key = (p, r)
                    if key not in pair_cache:
                        pair_cache[key] = mul(cre[p], cre[r])
                    add_into(acc, mul(pair_cache[key], mul(des[s], des[q])), 0.5 * v)
    terms = []
    for (x, z), c in sorted(acc.items(), key=lambda kv: (popcount(kv[0][0] | kv[0][1]), kv[0])):
        if abs(c) < 1e-10:
            continue
        assert abs(c.imag) < 1e-10, (x, z, c)
        terms.append((float(c.real), PauliString.from_masks(x, z, nq)))
    return terms


def pool_doubles(nelec, nso):
    """Closed-form count of spin-conserving doubles: same-spin pairs plus mixed pairs."""
    from math import comb

    occ_a = occ_b = nelec // 2
    vir_a = vir_b = (nso - nelec) // 2
    return comb(occ_a, 2) * comb(vir_a, 2) + comb(occ_b, 2) * comb(vir_b, 2) + occ_a * occ_b * vir_a * vir_b


def build(name, species, atoms, ncore):
    mol = gto.M(
        atom=[(el, (0.0, 0.0, zc)) for el, zc in atoms],
        basis="sto-3g",
        symmetry=True,
        unit="angstrom",
        verbose=0,
    )
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    assert mf.converged
    ncore = ncore or 0
    norb = mol.nao - ncore
    nelec = mol.nelectron - 2 * ncore
    cas = mcscf.CASCI(mf, norb, nelec)
    cas.ncore = ncore
    h1, ecore = cas.get_h1eff()
    h2 = cas.get_h2eff()
    from pyscf import ao2mo

    h2 = ao2mo.restore(1, h2, norb)
    cas.fcisolver.conv_tol = 1e-13
    e_casci = cas.kernel()[0]
    orbsym = list(mf.get_orbsym()[ncore:])
    irreps = [int(s) for s in orbsym for _ in range(2)]

    terms = qubit_hamiltonian(h1, h2, ecore)
    ham = QubitHamiltonian(
        n_qubits=2 * norb,
        terms=tuple(terms),
        n_electrons=nelec,
        hf_energy=float(mf.e_tot),
        orbital_irreps=tuple(irreps),
        meta={
            "molecule": species,
            "geometry": "; ".join(f"{el} 0 0 {zc:.4f}" for el, zc in atoms),
            "basis": "sto-3g",
            "frozen_core_orbitals": ncore,
            "point_group": mol.groupname,
            "pool_doubles": pool_doubles(nelec, 2 * norb),
        },
    )
    dim = 1 << ham.n_qubits
    rho = np.zeros((dim, dim))
    hf = hf_state_index(nelec)
    rho[hf, hf] = 1.0
    e_hf = expectation(ham, rho)
    assert abs(e_hf - mf.e_tot) < 1e-8, (name, e_hf, mf.e_tot)
    fci = exact_ground_energy(ham)
    assert abs(fci - e_casci) < 1e-8, (name, fci, e_casci)
    ham = QubitHamiltonian(
        ham.n_qubits, ham.terms, ham.n_electrons, ham.hf_energy,
        ham.orbital_irreps, fci_energy=fci, meta=ham.meta,
    )
    return ham


def ladder_device(name, n_rungs, rng, t_range, s_range):
    """2 x n ladder; qubits 2r and 2r+1 share rung r."""
    n = 2 * n_rungs
    coupling = []
    for r in range(n_rungs):
        coupling.append([2 * r, 2 * r + 1])
        if r + 1 < n_rungs:
            coupling.append([2 * r, 2 * r + 2])
            coupling.append([2 * r + 1, 2 * r + 3])
    return device_dict(name, n, coupling, rng, t_range, s_range)


def heavy_hex16(name, rng, t_range, s_range):
    """16-qubit heavy-hex fragment: a 12-ring with four pendant qubits.

    Labels are chosen so the low-index qubits form a compact patch and
    shortest paths among them stay inside it.
    """
    ring = [0, 1, 3, 5, 7, 9, 14, 13, 12, 11, 10, 8]
    coupling = [[ring[k], ring[(k + 1) % 12]] for k in range(12)]
    # pendant spacing 2, 2, 4, 4 around the ring, as on the reference device
    coupling += [[1, 2], [5, 4], [9, 6], [11, 15]]
    coupling = [sorted(e) for e in coupling]
    return device_dict(name, 16, sorted(coupling), rng, t_range, s_range)


def device_dict(name, n, coupling, rng, t_range, s_range):
    s_err = {str(q): float(np.round(rng.uniform(*s_range), 6)) for q in range(n)}
    t_err = {f"{i}-{j}": float(np.round(rng.uniform(*t_range), 6)) for i, j in coupling}
    return {"name": name, "n_qubits": n, "coupling": coupling, "s_err": s_err, "t_err": t_err}


def main():
    for name, (species, atoms, ncore) in MOLECULES.items():
        ham = build(name, species, atoms, ncore)
        save_hamiltonian(ham, HERE / f"{name}.json")
        print(f"{name}: n_qubits={ham.n_qubits} terms={len(ham.terms)} "
              f"E_HF={ham.hf_energy:.10f} E_FCI={ham.fci_energy:.10f} irreps={list(ham.orbital_irreps)}")
    rng = np.random.default_rng(2024)
    devices = {
        "ladder14.json": ladder_device("ladder14", 7, rng, (5e-3, 1e-2), (1e-4, 1e-3)),
        "heavyhex16.json": heavy_hex16("heavyhex16", rng, (1e-3, 5e-3), (1e-4, 1e-3)),
    }
    for fname, dev in devices.items():
        with open(HERE / fname, "w", encoding="utf-8") as fh:
            json.dump(dev, fh, indent=1)
            fh.write("\n")
        print(f"{fname}: {dev['n_qubits']} qubits, {len(dev['coupling'])} couplers")


if __name__ == "__main__":
    main()
