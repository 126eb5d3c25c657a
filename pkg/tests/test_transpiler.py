from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnm.simulator import Circuit, Gate, NoiseSpec, statevector
from gnm.transpiler import DeviceProfile, RoutingError, linear_device, load_device, transpile

from .conftest import FIXTURES


def demo_circuit() -> Circuit:
    """Four-qubit circuit whose CNOTs form the chain 1->0, 2->1, 3->2."""
    gates = [Gate("RY", (q,), q, 1.0) for q in range(4)]
    gates += [Gate("CNOT", (1, 0)), Gate("CNOT", (2, 1)), Gate("CNOT", (3, 2))]
    gates += [Gate("RZ", (q,), None, 0.3 * (q + 1)) for q in range(4)]
    return Circuit(4, gates)


def test_adjacent_cnot_unchanged():
    tc = transpile(Circuit(4, [Gate("CNOT", (0, 1))]), linear_device(4))
    assert tc.t_c == 1 and tc.s_c == 0
    assert tc.cnot_edges == [(0, 1)]


def test_distance_two_cnot():
    tc = transpile(Circuit(3, [Gate("CNOT", (0, 2))]), linear_device(3))
    assert tc.t_c == 7
    assert tc.cnot_edges == [(0, 1), (1, 0), (0, 1), (1, 2), (0, 1), (1, 0), (0, 1)]


def test_demo_circuit_edges():
    tc = transpile(demo_circuit(), linear_device(4))
    assert tc.cnot_edges == [(1, 0), (2, 1), (3, 2)]
    assert tc.s_c == 8 and tc.s_c + tc.t_c == len(tc.circuit.gates)
    assert tc.layout == (0, 1, 2, 3)


def test_single_qubit_gates_pass_through():
    c = Circuit(3, [Gate("H", (2,)), Gate("RZ", (0,), 0, 2.0), Gate("X", (1,))])
    assert transpile(c, linear_device(3)).circuit.gates == c.gates


def random_logical(rng, n, n_gates):
    gates = []
    slot = 0
    for _ in range(n_gates):
        if rng.random() < 0.4:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(Gate("CNOT", (int(a), int(b))))
        else:
            gates.append(Gate(str(rng.choice(["RX", "RY", "RZ"])), (int(rng.integers(n)),), slot, 1.0))
            slot += 1
    return Circuit(n, gates)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_unitary_equivalence_and_coupling(seed):
    rng = np.random.default_rng(seed)
    dev = load_device(FIXTURES / "ladder14.json")
    n = 6
    c = random_logical(rng, n, 20)
    tc = transpile(c, dev)
    assert all(dev.adjacent(a, b) for a, b in tc.cnot_edges)
    params = rng.normal(size=c.n_params)
    psi = statevector(c, params, 0b000101)
    # extra device qubits stay in |0>
    phi = statevector(tc.circuit, params, 0b000101).reshape(-1, 1 << n)
    np.testing.assert_allclose(phi[1:], 0, atol=1e-12)
    np.testing.assert_allclose(phi[0], psi, atol=1e-12)


@pytest.mark.parametrize("name", ["ladder14", "heavyhex16"])
def test_single_cnot_count_follows_distance(name):
    dev = load_device(FIXTURES / f"{name}.json")
    for a in range(dev.n_qubits):
        dist = dev.distances_from(a)
        for b in range(dev.n_qubits):
            if a == b:
                continue
            tc = transpile(Circuit(dev.n_qubits, [Gate("CNOT", (a, b))]), dev)
            assert tc.t_c == 6 * (dist[b] - 1) + 1


def test_shortest_path_ties_prefer_low_index():
    # square 0-1-3, 0-2-3: both routes have length 2
    dev = DeviceProfile("square", 4, ((0, 1), (0, 2), (1, 3), (2, 3)), {q: 0.0 for q in range(4)},
                        {e: 0.0 for e in ((0, 1), (0, 2), (1, 3), (2, 3))})
    assert dev.shortest_path(0, 3) == [0, 1, 3]
    assert dev.shortest_path(3, 0) == [3, 1, 0]


def test_disconnected_qubits_raise():
    dev = DeviceProfile("split", 4, ((0, 1), (2, 3)), {q: 0.0 for q in range(4)}, {(0, 1): 0.0, (2, 3): 0.0})
    with pytest.raises(RoutingError):
        transpile(Circuit(4, [Gate("CNOT", (0, 3))]), dev)


def test_circuit_larger_than_device():
    with pytest.raises(RoutingError):
        transpile(Circuit(5), linear_device(4))


def test_device_validation():
    with pytest.raises(ValueError):
        DeviceProfile("x", 2, ((0, 1),), {0: 0.0}, {(0, 1): 0.0})
    with pytest.raises(ValueError):
        DeviceProfile("x", 2, ((0, 1),), {0: 0.0, 1: 0.0}, {})
    with pytest.raises(ValueError):
        DeviceProfile("x", 2, ((0, 1),), {0: 2.0, 1: 0.0}, {(0, 1): 0.0})


@pytest.mark.parametrize("name", ["ladder14", "heavyhex16"])
def test_device_fixtures(name):
    dev = load_device(FIXTURES / f"{name}.json")
    assert dev.n_qubits in (14, 16)
    assert len(dev.distances_from(0)) == dev.n_qubits
    assert all(1e-4 <= v <= 1e-3 for v in dev.s_err.values())
    assert all(1e-3 <= v <= 1e-2 for v in dev.t_err.values())
    assert DeviceProfile.from_dict(dev.to_dict()) == dev


def test_noise_and_uniform_override():
    dev = linear_device(3, 1e-4, 5e-3)
    noise = dev.noise()
    assert noise.two_qubit(1, 0) == noise.two_qubit(0, 1) == 5e-3
    uni = dev.with_uniform_noise(1e-3, 1e-2)
    assert uni.coupling == dev.coupling
    assert set(uni.s_err.values()) == {1e-3} and set(uni.t_err.values()) == {1e-2}
    assert isinstance(uni.noise(), NoiseSpec)
