from __future__ import annotations

import numpy as np
import pytest

from gnm.ansatz import excitation_circuit, ops_circuit
from gnm.pauli import FermionExcitation
from gnm.simulator import NoiseSpec, Circuit
from gnm.transpiler import linear_device, transpile
from gnm.vqe import OptimizeSpec, energy_at, minimize, minimize_function

D = FermionExcitation


def h2_circuit():
    return transpile(excitation_circuit(D((0, 1), (2, 3)), 0, 4), linear_device(4)).circuit


def test_spec_validation():
    with pytest.raises(ValueError):
        OptimizeSpec((0, 0))
    with pytest.raises(ValueError):
        OptimizeSpec((0,), {0: 1.0})
    with pytest.raises(ValueError):
        OptimizeSpec((0, 1), initial=(0.0,))
    with pytest.raises(ValueError):
        OptimizeSpec((0,)).check(2)
    assert OptimizeSpec((0, 1)).iteration_budget == 400


def test_zero_free_slots(h2):
    c = h2_circuit()
    res = minimize(c, h2, NoiseSpec.ideal(), OptimizeSpec((), {0: 0.2}))
    assert res.iterations == 0
    assert res.energy == energy_at(c, h2, NoiseSpec.ideal(), [0.2])


def test_h2_reaches_fci(h2):
    res = minimize(h2_circuit(), h2, NoiseSpec.ideal(), OptimizeSpec.all_free(1))
    assert res.converged
    assert abs(res.energy - h2.fci_energy) < 1e-6


def test_quadratic_stub():
    x, f, _, ok = minimize_function(lambda t: float((t[0] - 0.3) ** 2), OptimizeSpec((0,)))
    assert ok and abs(x[0] - 0.3) < 1e-5 and f < 1e-10


def test_budget_exhaustion_reported():
    fn = lambda t: float(np.sum((t - np.arange(len(t))) ** 2))  # noqa: E731
    x, _, nit, ok = minimize_function(fn, OptimizeSpec((0, 1, 2), max_iters=5))
    assert not ok and nit <= 5


def test_energy_at_examples(h2):
    c = h2_circuit()
    assert abs(energy_at(c, h2, NoiseSpec.ideal(), [0.0]) - h2.hf_energy) < 1e-12
    assert energy_at(c, h2, linear_device(4, 1e-3, 1e-2).noise(), [0.0]) > h2.hf_energy


def test_reported_energy_is_reevaluation(h2):
    noise = linear_device(4, 1e-3, 1e-2).noise()
    c = h2_circuit()
    res = minimize(c, h2, noise, OptimizeSpec.all_free(1))
    assert energy_at(c, h2, noise, res.theta_star) == res.energy
    assert res.energy <= energy_at(c, h2, noise, [0.0])


def test_frozen_slots_held(h2_stretched):
    h = h2_stretched
    c = transpile(ops_circuit([D((0, 1), (2, 3)), D((0,), (2,))], 4), linear_device(4)).circuit
    noise = linear_device(4, 1e-3, 1e-2).noise()
    res = minimize(c, h, noise, OptimizeSpec((1,), {0: 0.4}))
    assert res.theta_star[0] == 0.4
    assert res.energy <= energy_at(c, h, noise, [0.4, 0.0])


def test_warm_start_never_worse(h2_stretched):
    h = h2_stretched
    c = transpile(ops_circuit([D((0, 1), (2, 3)), D((1,), (3,))], 4), linear_device(4)).circuit
    noise = linear_device(4, 1e-3, 1e-2).noise()
    start = (-0.3, 0.05)
    res = minimize(c, h, noise, OptimizeSpec.all_free(2, start))
    assert res.energy <= energy_at(c, h, noise, start)


def test_bit_identical_reruns(h4):
    c = transpile(ops_circuit([D((0, 1), (4, 5)), D((2, 3), (6, 7))], 8), linear_device(8)).circuit
    noise = linear_device(8, 1e-3, 1e-2).noise()
    a = minimize(c, h4, noise, OptimizeSpec.all_free(2))
    b = minimize(c, h4, noise, OptimizeSpec.all_free(2))
    assert a.energy == b.energy and a.iterations == b.iterations
    np.testing.assert_array_equal(a.theta_star, b.theta_star)


def test_empty_circuit(h2):
    res = minimize(Circuit(4), h2, NoiseSpec.ideal(), OptimizeSpec(()))
    assert res.energy == pytest.approx(h2.hf_energy, abs=1e-12)
