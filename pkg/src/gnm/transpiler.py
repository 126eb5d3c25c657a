"""Device profiles and SWAP-chain routing onto a coupling map."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .simulator import Circuit, Gate, NoiseSpec

__all__ = ["DeviceProfile", "TranspiledCircuit", "RoutingError", "transpile", "load_device", "linear_device"]


class RoutingError(ValueError):
    pass


def _edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    n_qubits: int
    coupling: tuple[tuple[int, int], ...]
    s_err: Mapping[int, float]
    t_err: Mapping[tuple[int, int], float]
    _adj: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coupling = tuple(sorted({_edge(int(a), int(b)) for a, b in self.coupling}))
        object.__setattr__(self, "coupling", coupling)
        object.__setattr__(self, "s_err", {int(q): float(v) for q, v in self.s_err.items()})
        object.__setattr__(self, "t_err", {_edge(*map(int, e)): float(v) for e, v in self.t_err.items()})
        adj = {q: [] for q in range(self.n_qubits)}
        for a, b in coupling:
            if a == b or not (0 <= a < self.n_qubits and 0 <= b < self.n_qubits):
                raise ValueError(f"invalid coupling pair ({a}, {b})")
            adj[a].append(b)
            adj[b].append(a)
        for nb in adj.values():
            nb.sort()
        object.__setattr__(self, "_adj", adj)
        missing = [q for q in range(self.n_qubits) if q not in self.s_err]
        if missing:
            raise ValueError(f"qubits without s_err: {missing}")
        missing_e = [e for e in coupling if e not in self.t_err]
        if missing_e:
            raise ValueError(f"coupling pairs without t_err: {missing_e}")
        for v in list(self.s_err.values()) + list(self.t_err.values()):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"error rate {v} outside [0, 1]")

    def neighbors(self, q: int) -> list[int]:
        return self._adj[q]

    def adjacent(self, a: int, b: int) -> bool:
        return _edge(a, b) in self.t_err

    def distances_from(self, src: int) -> dict[int, int]:
        dist = {src: 0}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in self._adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def shortest_path(self, a: int, b: int) -> list[int]:
        """Shortest path from ``a`` to ``b``; among ties the lexicographically
        smallest sequence of intermediate qubits."""
        dist = self.distances_from(b)
        if a not in dist:
            raise RoutingError(f"qubits {a} and {b} are disconnected on {self.name}")
        path = [a]
        while path[-1] != b:
            d = dist[path[-1]]
            path.append(min(v for v in self._adj[path[-1]] if dist.get(v) == d - 1))
        return path

    def with_uniform_noise(self, p1: float, p2: float) -> DeviceProfile:
        """Same connectivity with every error rate replaced by ``p1`` / ``p2``."""
        return DeviceProfile(
            f"{self.name}[p1={p1!r},p2={p2!r}]",
            self.n_qubits,
            self.coupling,
            {q: p1 for q in range(self.n_qubits)},
            {e: p2 for e in self.coupling},
        )

    def noise(self) -> NoiseSpec:
        p2 = {}
        for (a, b), v in self.t_err.items():
            p2[(a, b)] = v
            p2[(b, a)] = v
        return NoiseSpec(dict(self.s_err), p2)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_qubits": self.n_qubits,
            "coupling": [list(e) for e in self.coupling],
            "s_err": {str(q): v for q, v in sorted(self.s_err.items())},
            "t_err": {f"{a}-{b}": v for (a, b), v in sorted(self.t_err.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> DeviceProfile:
        t_err = {}
        for key, v in d["t_err"].items():
            a, b = key.split("-")
            t_err[(int(a), int(b))] = v
        return cls(
            d["name"],
            int(d["n_qubits"]),
            tuple(tuple(e) for e in d["coupling"]),
            {int(q): v for q, v in d["s_err"].items()},
            t_err,
        )


def load_device(path: str | Path) -> DeviceProfile:
    with open(path, encoding="utf-8") as fh:
        return DeviceProfile.from_dict(json.load(fh))


def linear_device(n: int, s: float = 0.0, t: float = 0.0, name: str = "linear") -> DeviceProfile:
    edges = tuple((i, i + 1) for i in range(n - 1))
    return DeviceProfile(name, n, edges, {q: s for q in range(n)}, {e: t for e in edges})


@dataclass(frozen=True)
class TranspiledCircuit:
    circuit: Circuit
    layout: tuple[int, ...]
    s_c: int
    t_c: int

    @property
    def cnot_edges(self) -> list[tuple[int, int]]:
        return [g.qubits for g in self.circuit.gates if g.name == "CNOT"]


def _swap(a: int, b: int) -> list[Gate]:
    return [Gate("CNOT", (a, b)), Gate("CNOT", (b, a)), Gate("CNOT", (a, b))]


def transpile(circuit: Circuit, device: DeviceProfile) -> TranspiledCircuit:
    """Trivial layout; every non-adjacent CNOT is routed by a SWAP chain that
    walks the control next to the target and is undone afterwards."""
    if circuit.n_qubits > device.n_qubits:
        raise RoutingError(f"circuit needs {circuit.n_qubits} qubits, device {device.name} has {device.n_qubits}")
    out: list[Gate] = []
    cache: dict[tuple[int, int], list[Gate]] = {}
    for g in circuit.gates:
        if g.name != "CNOT":
            out.append(g)
            continue
        c, t = g.qubits
        if device.adjacent(c, t):
            out.append(g)
            continue
        if (c, t) not in cache:
            path = device.shortest_path(c, t)
            chain = []
            for u, v in zip(path[:-2], path[1:-1]):
                chain += _swap(u, v)
            cache[(c, t)] = chain + [Gate("CNOT", (path[-2], t))] + chain[::-1]
        out.extend(cache[(c, t)])
    routed = Circuit(device.n_qubits, out)
    t_c = routed.cnot_count
    return TranspiledCircuit(routed, tuple(range(circuit.n_qubits)), len(out) - t_c, t_c)
