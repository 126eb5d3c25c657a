from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from gnm.pauli import (
    FermionExcitation,
    PauliString,
    exact_ground_energy,
    expectation,
    hamiltonian_from_dict,
    hamiltonian_to_dict,
    hf_state_index,
    jw_map,
)

from .conftest import hamiltonian, toy_hamiltonian


def fermion_ops(n):
    """Dense annihilators with occupied = |1>, Z strings on lower modes."""
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    ops = []
    for p in range(n):
        m = np.ones((1, 1), dtype=complex)
        for q in range(n):
            f = z if q < p else (lower if q == p else np.eye(2))
            m = np.kron(f, m)
        ops.append(m)
    return ops


def tau_matrix(exc: FermionExcitation, n: int) -> np.ndarray:
    a = fermion_ops(n)
    t = np.eye(1 << n, dtype=complex)
    for v in exc.virtual:
        t = t @ a[v].conj().T
    for i in reversed(exc.occupied):
        t = t @ a[i]
    return t - t.conj().T


def pauli_sum(terms, n):
    return sum(1j * c * p.to_matrix() for c, p in terms)


# -- Pauli strings -----------------------------------------------------------


def test_product_phases_match_matrices():
    for a in ("XYZI", "YYXZ", "ZIXY"):
        for b in ("YXZZ", "IZYX", "XXXX"):
            phase, p = PauliString(a) * PauliString(b)
            np.testing.assert_allclose(PauliString(a).to_matrix() @ PauliString(b).to_matrix(), phase * p.to_matrix())


def test_masks_round_trip():
    p = PauliString("XYZIY")
    assert PauliString.from_masks(*p.masks, 5) == p
    assert p.weight == 4 and p.support == [0, 1, 2, 4]


def test_identity_is_unique_scalar():
    assert PauliString.identity(3).is_identity
    assert not PauliString("IZI").is_identity


def test_invalid_label_rejected():
    with pytest.raises(ValueError):
        PauliString("XQ")


# -- excitations and Jordan-Wigner ---------------------------------------------


@pytest.mark.parametrize(
    "occ, vir",
    [((0, 1), (1, 2)), ((1,), (0,)), ((1, 0), (2, 3)), ((0, 1), (2, 2)), ((0, 1, 2), (3, 4, 5))],
)
def test_invalid_excitations(occ, vir):
    with pytest.raises(ValueError):
        FermionExcitation(occ, vir)


@pytest.mark.parametrize("occ, vir", [((0,), (1,)), ((0,), (3,)), ((0, 2), (1, 4))])
def test_spin_changing_excitations_rejected(occ, vir):
    with pytest.raises(ValueError):
        FermionExcitation(occ, vir)


def test_single_three_qubits():
    exc = FermionExcitation((0,), (2,))
    terms = jw_map(exc, 3)
    got = {p.ops: c for c, p in terms}
    # occupied = |1>: tau = (i/2) (Y0 Z1 X2 - X0 Z1 Y2)
    assert got == {"YZX": 0.5, "XZY": -0.5}
    np.testing.assert_allclose(pauli_sum(terms, 3), tau_matrix(exc, 3), atol=1e-15)


def test_double_has_eight_weight_four_strings():
    terms = jw_map(FermionExcitation((0, 1), (2, 3)), 4)
    assert len(terms) == 8
    assert all(p.weight == 4 for _, p in terms)
    assert sorted(abs(c) for c, _ in terms) == [0.125] * 8


def test_single_carries_parity_string():
    terms = jw_map(FermionExcitation((0,), (2,)), 3)
    assert {p.ops for _, p in terms} == {"XZY", "YZX"}


def test_index_out_of_range():
    with pytest.raises(ValueError):
        jw_map(FermionExcitation((0,), (4,)), 4)


@pytest.mark.parametrize(
    "occ, vir, n",
    [((0,), (2,), 4), ((1,), (5,), 6), ((0, 1), (2, 3), 4), ((0, 3), (4, 7), 8), ((0, 2), (4, 6), 8), ((1, 2), (5, 6), 8)],
)
def test_jw_matches_dense_fermion_operators(occ, vir, n):
    exc = FermionExcitation(occ, vir)
    terms = jw_map(exc, n)
    m = pauli_sum(terms, n)
    np.testing.assert_allclose(m, tau_matrix(exc, n), atol=1e-14)
    # anti-Hermitian generator, commuting strings, unitary exponential
    np.testing.assert_allclose(m.conj().T, -m, atol=1e-15)
    assert all(p.commutes(q) for _, p in terms for _, q in terms)
    u = expm(0.37 * m)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(1 << n), atol=1e-12)


# -- expectation ----------------------------------------------------------------


def test_expectation_examples():
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    assert expectation(toy_hamiltonian({"Z": 1.0}), rho0) == 1.0
    assert expectation(toy_hamiltonian({"X": 1.0}), rho0) == 0.0


def test_expectation_dimension_mismatch():
    with pytest.raises(ValueError):
        expectation(toy_hamiltonian({"ZZ": 1.0}), np.eye(2) / 2)


def test_h4_reference_state_energy(h4):
    dim = 1 << h4.n_qubits
    rho = np.zeros((dim, dim))
    hf = hf_state_index(h4.n_electrons)
    rho[hf, hf] = 1.0
    assert abs(expectation(h4, rho) - h4.hf_energy) < 1e-8


def random_density(rng, n):
    a = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(size=(1 << n, 1 << n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_expectation_linear_and_real(seed):
    rng = np.random.default_rng(seed)
    h = hamiltonian("h2_0.74")
    rho = random_density(rng, 4)
    a, b = rng.normal(size=2)
    c1 = rng.normal(size=len(h.terms))
    c2 = rng.normal(size=len(h.terms))
    lhs = expectation(h.with_coefficients(a * c1 + b * c2), rho)
    rhs = a * expectation(h.with_coefficients(c1), rho) + b * expectation(h.with_coefficients(c2), rho)
    assert abs(lhs - rhs) < 1e-10
    assert abs(expectation(h, rho) - np.trace(h.to_matrix() @ rho).real) < 1e-10


# -- exact ground energy ---------------------------------------------------------


def test_exact_ground_energy_examples(h2):
    assert exact_ground_energy(toy_hamiltonian({"Z": 1.0}, 1), sector=False) == -1.0
    assert exact_ground_energy(toy_hamiltonian({"II": -0.75}, 1)) == pytest.approx(-0.75, abs=1e-15)
    assert abs(exact_ground_energy(h2) - h2.fci_energy) < 1e-8


def test_sector_restriction_matters():
    # the unrestricted minimum sits in the empty sector
    h = toy_hamiltonian({"ZI": 1.0, "IZ": 1.0}, 1)
    assert exact_ground_energy(h, sector=False) == pytest.approx(-2.0)
    assert exact_ground_energy(h) == pytest.approx(0.0)


def test_exact_ground_energy_capacity():
    h = toy_hamiltonian({"Z" * 13: 1.0})
    with pytest.raises(MemoryError):
        exact_ground_energy(h)


# -- Hamiltonian invariants and file format --------------------------------------------


def test_duplicate_terms_rejected():
    with pytest.raises(ValueError):
        hamiltonian_from_dict(
            {"n_qubits": 1, "n_electrons": 0, "hf_energy": 0.0, "orbital_irreps": [0],
             "terms": [{"coeff": 1.0, "pauli": "Z"}, {"coeff": 2.0, "pauli": "Z"}]}
        )


def test_complex_coefficient_rejected():
    with pytest.raises(ValueError):
        hamiltonian_from_dict(
            {"n_qubits": 1, "n_electrons": 0, "hf_energy": 0.0, "orbital_irreps": [0],
             "terms": [{"coeff": [1.0, 0.5], "pauli": "Z"}]}
        )


def test_irreps_length_checked():
    with pytest.raises(ValueError):
        hamiltonian_from_dict(
            {"n_qubits": 2, "n_electrons": 0, "hf_energy": 0.0, "orbital_irreps": [0],
             "terms": [{"coeff": 1.0, "pauli": "ZZ"}]}
        )


def test_dict_round_trip(h4):
    again = hamiltonian_from_dict(hamiltonian_to_dict(h4))
    assert again == h4
    assert again.meta == h4.meta
