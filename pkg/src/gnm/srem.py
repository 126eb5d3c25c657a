"""Sequential reference error mitigation over 1-, 2- and 3-parameter snippets.

Every snippet is the ordered product of one, two or three ansatz operators.
Its mitigated energy corrects the noisy optimum by the deviation of a
reference energy whose mitigated value is already known: the Hartree-Fock
energy for one parameter, and the mitigated energy of the parent snippet
for two and three parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ansatz import AnsatzSpec, ops_circuit
from .compiled import program_for
from .parallel import pmap
from .pauli import FermionExcitation, QubitHamiltonian
from .simulator import NoiseSpec
from .transpiler import DeviceProfile, TranspiledCircuit, transpile
from .vqe import OptimizeSpec, minimize

__all__ = [
    "SremContext",
    "SremRecord",
    "Snippet",
    "enumerate_snippets",
    "srem_1p",
    "srem_2p",
    "srem_3p",
    "run_cascade",
]


@dataclass(frozen=True)
class SremContext:
    hamiltonian: QubitHamiltonian
    device: DeviceProfile
    noise: NoiseSpec
    oracle: bool = False


@dataclass(frozen=True)
class Snippet:
    positions: tuple[int, ...]  # indices into the ansatz operator list
    ops: tuple[FermionExcitation, ...]

    @property
    def n_params(self) -> int:
        return len(self.ops)

    @property
    def label(self) -> str:
        return "|".join(op.label for op in self.ops)


@dataclass
class SremRecord:
    snippet: Snippet
    E_noisy: float
    E_srem: float
    E_ref0: float  # noisy energy with the newest parameter at 0
    delta_ref: float
    E_partial: float  # only the newest parameter optimized
    E_prime: float  # all parameters, warm start
    theta_prime: np.ndarray  # optimum of the warm-started run
    theta_noisy: np.ndarray  # optimum of the zero-start run
    converged: bool
    transpiled: TranspiledCircuit = field(repr=False)
    E_ideal: float | None = None

    @property
    def op_indices(self) -> tuple[int, ...]:
        return self.snippet.positions

    @property
    def n_params(self) -> int:
        return self.snippet.n_params


def enumerate_snippets(ansatz: AnsatzSpec, max_3p: int | None = None, seed: int = 0) -> list[Snippet]:
    """All singletons, all ordered pairs, then consecutive triples (seeded subsample above ``max_3p``)."""
    ops = ansatz.ops
    m = len(ops)
    out = [Snippet((j,), (ops[j],)) for j in range(m)]
    out += [Snippet((j, k), (ops[j], ops[k])) for j in range(m) for k in range(j + 1, m)]
    triples = [(j, j + 1, j + 2) for j in range(m - 2)]
    if max_3p is not None and len(triples) > max_3p:
        rng = np.random.default_rng(seed)
        keep = sorted(rng.choice(len(triples), size=max_3p, replace=False).tolist())
        triples = [triples[i] for i in keep]
    out += [Snippet(t, tuple(ops[i] for i in t)) for t in triples]
    return out


def _prepare(snippet: Snippet, ctx: SremContext):
    tc = transpile(ops_circuit(snippet.ops, ctx.hamiltonian.n_qubits), ctx.device)
    return tc, program_for(tc.circuit, ctx.noise, ctx.hamiltonian)


def _ideal(tc: TranspiledCircuit, ctx: SremContext) -> float:
    res = minimize(tc.circuit, ctx.hamiltonian, NoiseSpec.ideal(), OptimizeSpec.all_free(tc.circuit.n_params))
    return res.energy


def _cascade_step(snippet: Snippet, ctx: SremContext, prior_theta: Sequence[float], prior_mitigated: float) -> SremRecord:
    """Shared body: the newest slot is ``p - 1``; earlier slots start at ``prior_theta``."""
    p = snippet.n_params
    tc, program = _prepare(snippet, ctx)
    h = ctx.hamiltonian
    prior_theta = [float(v) for v in prior_theta]
    e_ref0 = float(program.energy(np.array(prior_theta + [0.0])))
    partial = minimize(tc.circuit, h, ctx.noise, OptimizeSpec((p - 1,), dict(enumerate(prior_theta))), program)
    delta = prior_mitigated - e_ref0
    if p == 1:
        prime = partial
    else:
        prime = minimize(tc.circuit, h, ctx.noise, OptimizeSpec.all_free(p, partial.theta_star), program)
    noisy = prime if p == 1 else minimize(tc.circuit, h, ctx.noise, OptimizeSpec.all_free(p), program)
    return SremRecord(
        snippet=snippet,
        E_noisy=noisy.energy,
        E_srem=prime.energy + delta,
        E_ref0=e_ref0,
        delta_ref=delta,
        E_partial=partial.energy,
        E_prime=prime.energy,
        theta_prime=prime.theta_star,
        theta_noisy=noisy.theta_star,
        converged=partial.converged and prime.converged and noisy.converged,
        transpiled=tc,
        E_ideal=_ideal(tc, ctx) if ctx.oracle else None,
    )


def srem_1p(snippet: Snippet, ctx: SremContext) -> SremRecord:
    """``E_srem = E_J + (E_HF - E_J^0)``; the noisy value is the zero-start optimum ``E_J``."""
    if snippet.n_params != 1:
        raise ValueError("srem_1p needs a one-operator snippet")
    return _cascade_step(snippet, ctx, [], ctx.hamiltonian.hf_energy)


def srem_2p(snippet: Snippet, prior: SremRecord, ctx: SremContext) -> SremRecord:
    """``E_srem = E'_JK + E_J^EM - (E_K^0)_J`` with the warm start from the prior optimum."""
    if snippet.n_params != 2 or prior.snippet.positions != snippet.positions[:1]:
        raise ValueError("srem_2p needs the one-parameter record of the first operator")
    return _cascade_step(snippet, ctx, prior.theta_prime, prior.E_srem)


def srem_3p(snippet: Snippet, prior: SremRecord, ctx: SremContext) -> SremRecord:
    """``E_srem = E'_JKL + E_JK^SREM - (E_L^0)_JK``."""
    if snippet.n_params != 3 or prior.snippet.positions != snippet.positions[:2]:
        raise ValueError("srem_3p needs the two-parameter record of the leading pair")
    return _cascade_step(snippet, ctx, prior.theta_prime, prior.E_srem)


def run_cascade(snippets: Sequence[Snippet], ctx: SremContext) -> list[SremRecord]:
    """All records in snippet order; depth by depth, each depth fanned out in parallel."""
    by_pos: dict[tuple[int, ...], SremRecord] = {}
    for depth, step in ((1, srem_1p), (2, srem_2p), (3, srem_3p)):
        todo = [s for s in snippets if s.n_params == depth]
        if depth == 1:
            done = pmap(lambda s: step(s, ctx), todo)
        else:
            missing = [s.positions[:-1] for s in todo if s.positions[:-1] not in by_pos]
            if missing:
                raise ValueError(f"snippets without parent records: {missing}")
            done = pmap(lambda s: step(s, by_pos[s.positions[:-1]], ctx), todo)
        for rec in done:
            by_pos[rec.snippet.positions] = rec
    return [by_pos[s.positions] for s in snippets]

