"""Deterministic Nelder-Mead minimization over a subset of parameter slots."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .compiled import program_for
from .pauli import QubitHamiltonian
from .simulator import Circuit, NoiseSpec

__all__ = ["OptimizeSpec", "VqeResult", "minimize", "minimize_function", "energy_at"]

SIMPLEX_STEP = 0.05


@dataclass(frozen=True)
class OptimizeSpec:
    free_slots: tuple[int, ...]
    fixed_values: Mapping[int, float] = field(default_factory=dict)
    initial: tuple[float, ...] | None = None
    max_iters: int | None = None
    xtol: float = 1e-6
    ftol: float = 1e-9

    def __post_init__(self):
        free = tuple(int(s) for s in self.free_slots)
        object.__setattr__(self, "free_slots", free)
        object.__setattr__(self, "fixed_values", {int(k): float(v) for k, v in self.fixed_values.items()})
        init = (0.0,) * len(free) if self.initial is None else tuple(float(v) for v in self.initial)
        object.__setattr__(self, "initial", init)
        if len(set(free)) != len(free):
            raise ValueError("duplicate free slot")
        if set(free) & set(self.fixed_values):
            raise ValueError("a slot cannot be both free and fixed")
        if len(init) != len(free):
            raise ValueError("initial point must have one value per free slot")

    @classmethod
    def all_free(cls, n: int, initial: Sequence[float] | None = None) -> OptimizeSpec:
        return cls(tuple(range(n)), {}, None if initial is None else tuple(initial))

    @property
    def iteration_budget(self) -> int:
        return self.max_iters if self.max_iters is not None else 200 * len(self.free_slots)

    def check(self, n_params: int) -> None:
        if sorted(self.free_slots + tuple(self.fixed_values)) != list(range(n_params)):
            raise ValueError(f"free and fixed slots must partition 0..{n_params - 1}")

    def full_vector(self, free_values) -> np.ndarray:
        out = np.zeros(len(self.free_slots) + len(self.fixed_values))
        for s, v in self.fixed_values.items():
            out[s] = v
        out[list(self.free_slots)] = free_values
        return out


@dataclass(frozen=True)
class VqeResult:
    theta_star: np.ndarray  # full parameter vector
    energy: float
    iterations: int
    converged: bool


def minimize_function(fn: Callable[[np.ndarray], float], spec: OptimizeSpec) -> tuple[np.ndarray, float, int, bool]:
    """Minimize ``fn`` over the free values; returns ``(x, f, iterations, converged)``."""
    x0 = np.array(spec.initial, dtype=float)
    dim = x0.shape[0]
    if dim == 0:
        return x0, float(fn(x0)), 0, True
    simplex = np.vstack([x0] + [x0 + SIMPLEX_STEP * np.eye(dim)[k] for k in range(dim)])
    res = _scipy_minimize(
        fn,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "maxiter": spec.iteration_budget,
            "maxfev": 2 * spec.iteration_budget + dim + 1,
            "xatol": spec.xtol,
            "fatol": spec.ftol,
            "adaptive": False,
        },
    )
    return np.asarray(res.x, dtype=float), float(res.fun), int(res.nit), bool(res.success)


def minimize(circuit: Circuit, hamiltonian: QubitHamiltonian, noise: NoiseSpec, spec: OptimizeSpec,
             program=None) -> VqeResult:
    """Minimize the noisy energy over ``spec.free_slots`` with the other slots frozen.

    The reported energy is a fresh evaluation at the returned parameters,
    identical to :func:`energy_at` there.
    """
    spec.check(circuit.n_params)
    if program is None:
        program = program_for(circuit, noise, hamiltonian)
    fn = program.restricted(spec.free_slots, spec.fixed_values)
    x, _, nit, ok = minimize_function(fn, spec)
    theta = spec.full_vector(x)
    return VqeResult(theta, float(program.energy(theta)), nit, ok)


def energy_at(circuit: Circuit, hamiltonian: QubitHamiltonian, noise: NoiseSpec, params, program=None) -> float:
    if program is None:
        program = program_for(circuit, noise, hamiltonian)
    return float(program.energy(np.asarray(params, dtype=float)))
