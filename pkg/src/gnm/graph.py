"""Directed CNOT graphs, node features and regressor features of transpiled circuits."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .transpiler import DeviceProfile, TranspiledCircuit

__all__ = [
    "CircuitGraph",
    "RegressionFeatures",
    "TrainingSample",
    "Scaler",
    "build_graph",
    "build_features",
    "propagation_matrix",
    "standardize",
    "save_samples",
    "load_samples",
]

FEATURE_NAMES = ("n_c", "t_c", "s_c", "p_c")


def propagation_matrix(n: int, edges: Sequence[tuple[tuple[int, int], int]]) -> np.ndarray:
    """``D^-1/2 (A + A^T + I) D^-1/2`` with ``D`` the row sums of the bracket."""
    a = np.zeros((n, n))
    for (i, j), w in edges:
        a[i, j] += w
    a_tilde = a + a.T + np.eye(n)
    d = 1.0 / np.sqrt(a_tilde.sum(axis=1))
    s = d[:, None] * a_tilde * d[None, :]
    return 0.5 * (s + s.T)  # exact symmetry despite rounding


@dataclass(frozen=True)
class CircuitGraph:
    n: int
    edges: tuple[tuple[tuple[int, int], int], ...]  # ((control, target), multiplicity), sorted
    X_g: np.ndarray
    S: np.ndarray

    @property
    def adjacency_list(self) -> list[tuple[int, int]]:
        return [e for e, _ in self.edges]

    @property
    def total_weight(self) -> int:
        return sum(w for _, w in self.edges)


def build_graph(tc: TranspiledCircuit, device: DeviceProfile) -> CircuitGraph:
    n = device.n_qubits
    counts = Counter()
    used = set()
    for g in tc.circuit.gates:
        used.update(g.qubits)
        if g.name == "CNOT":
            c, t = g.qubits
            if not device.adjacent(c, t):
                raise ValueError(f"CNOT {g.qubits} is not on a coupling pair of {device.name}")
            counts[(c, t)] += 1
    x_g = np.zeros((n, n))
    for q in used:
        x_g[q, q] = device.s_err[q]
    for c, t in counts:
        key = (c, t) if c < t else (t, c)
        x_g[c, t] = x_g[t, c] = device.t_err[key]
    edges = tuple(sorted(counts.items()))
    return CircuitGraph(n, edges, x_g, propagation_matrix(n, edges))


@dataclass(frozen=True)
class RegressionFeatures:
    n_c: float
    t_c: int
    s_c: int
    p_c: int

    def vector(self) -> np.ndarray:
        return np.array([self.n_c, self.t_c, self.s_c, self.p_c], dtype=float)


def build_features(tc: TranspiledCircuit, e_noisy: float) -> RegressionFeatures:
    return RegressionFeatures(float(e_noisy), tc.t_c, tc.s_c, tc.circuit.n_params)


@dataclass(frozen=True)
class TrainingSample:
    graph: CircuitGraph
    features: RegressionFeatures
    label: float
    label_kind: str
    name: str = ""

    def __post_init__(self):
        if self.label_kind not in ("ideal", "srem"):
            raise ValueError(f"unknown label kind {self.label_kind!r}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.graph.n,
            "edges": [[c, t, w] for (c, t), w in self.graph.edges],
            "X_g": self.graph.X_g.ravel().tolist(),
            "X_r": dict(zip(FEATURE_NAMES, (self.features.n_c, self.features.t_c, self.features.s_c, self.features.p_c))),
            "label": self.label,
            "label_kind": self.label_kind,
        }

    @classmethod
    def from_dict(cls, d: dict) -> TrainingSample:
        n = int(d["n"])
        edges = tuple(sorted(((int(c), int(t)), int(w)) for c, t, w in d["edges"]))
        x_g = np.array(d["X_g"], dtype=float).reshape(n, n)
        xr = d["X_r"]
        feats = RegressionFeatures(float(xr["n_c"]), int(xr["t_c"]), int(xr["s_c"]), int(xr["p_c"]))
        graph = CircuitGraph(n, edges, x_g, propagation_matrix(n, edges))
        return cls(graph, feats, float(d["label"]), d["label_kind"], d.get("name", ""))


@dataclass(frozen=True)
class Scaler:
    """Per-feature z-score of ``X_r`` and of the label; zero spread is clamped to 1."""

    mean: np.ndarray
    std: np.ndarray
    label_mean: float
    label_std: float

    @classmethod
    def fit(cls, samples: Sequence[TrainingSample]) -> Scaler:
        if not samples:
            raise ValueError("cannot fit a scaler on zero samples")
        x = np.array([s.features.vector() for s in samples])
        y = np.array([s.label for s in samples])
        std = x.std(axis=0)
        std[std == 0] = 1.0
        ystd = float(y.std()) or 1.0
        return cls(x.mean(axis=0), std, float(y.mean()), ystd)

    def features(self, f: RegressionFeatures) -> np.ndarray:
        return (f.vector() - self.mean) / self.std

    def label(self, y: float) -> float:
        return (y - self.label_mean) / self.label_std

    def inverse_label(self, z: float) -> float:
        return z * self.label_std + self.label_mean

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "label_mean": self.label_mean,
            "label_std": self.label_std,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Scaler:
        return cls(np.array(d["mean"], dtype=float), np.array(d["std"], dtype=float),
                   float(d["label_mean"]), float(d["label_std"]))


def standardize(samples: Sequence[TrainingSample]) -> tuple[list[tuple[np.ndarray, float]], Scaler]:
    """Standardized ``(X_r, label)`` pairs in sample order, plus the fitted scaler."""
    scaler = Scaler.fit(samples)
    return [(scaler.features(s.features), scaler.label(s.label)) for s in samples], scaler


def save_samples(samples: Iterable[TrainingSample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(s.to_dict(), separators=(",", ":")) + "\n")


def load_samples(path: str | Path) -> list[TrainingSample]:
    with open(path, encoding="utf-8") as fh:
        return [TrainingSample.from_dict(json.loads(line)) for line in fh if line.strip()]
