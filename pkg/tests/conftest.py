from __future__ import annotations

import time
from pathlib import Path
from types import SimpleNamespace

import pytest

from gnm.pauli import PauliString, QubitHamiltonian, load_hamiltonian
from gnm.transpiler import load_device

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"


def hamiltonian(name: str) -> QubitHamiltonian:
    return load_hamiltonian(FIXTURES / f"{name}.json")


def device(name: str):
    return load_device(FIXTURES / f"{name}.json")


def toy_hamiltonian(terms: dict[str, float], n_electrons: int = 0) -> QubitHamiltonian:
    n = len(next(iter(terms)))
    return QubitHamiltonian(n, tuple((c, PauliString(p)) for p, c in terms.items()), n_electrons, 0.0, (0,) * n)


@pytest.fixture(scope="session")
def h2():
    return hamiltonian("h2_0.74")


@pytest.fixture(scope="session")
def h2_stretched():
    return hamiltonian("h2_2.00")


@pytest.fixture(scope="session")
def h4():
    return hamiltonian("h4_1.00")


@pytest.fixture(scope="session")
def ladder():
    return device("ladder14")


@pytest.fixture(scope="session")
def h4_uniform(h4):
    """H4 on the 14-qubit ladder with p1 = 1e-3, p2 = 1e-2: ansatz and full SREM cascade."""
    from gnm.ansatz import assemble, build_pool, screen_doubles
    from gnm.srem import SremContext, enumerate_snippets, run_cascade

    start = time.perf_counter()
    dev = device("ladder14").with_uniform_noise(1e-3, 1e-2)
    noise = dev.noise()
    pool = build_pool(h4)
    spec = assemble(screen_doubles(pool, h4, dev, noise), pool, h4)
    ctx = SremContext(h4, dev, noise, oracle=True)
    records = run_cascade(enumerate_snippets(spec), ctx)
    return SimpleNamespace(spec=spec, records=records, device=dev, seconds=time.perf_counter() - start)


@pytest.fixture(scope="session")
def h4_uniform_samples(h4_uniform):
    from gnm.graph import TrainingSample, build_features, build_graph

    dev = h4_uniform.device
    records = h4_uniform.records
    return [
        TrainingSample(build_graph(r.transpiled, dev), build_features(r.transpiled, r.E_noisy), r.E_srem, "srem",
                       r.snippet.label)
        for r in records
        if r.converged
    ]


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {criterion} {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
