"""End-to-end stages: select, labels, train, mitigate and the noise sweep.

Each stage reads and writes files in the manifest's output directory, so any
stage can be rerun on its own.  CSV files carry a header row and a trailing
``#`` comment with the seed, a hash of the stage inputs and the tool version.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .ansatz import DEFAULT_EPSILON, AnsatzSpec, assemble, build_pool, screen_doubles
from .graph import TrainingSample, build_features, build_graph, load_samples, save_samples
from .model import TrainConfig, TrainResult, load_model, predict, save_model, train
from .pauli import QubitHamiltonian, load_hamiltonian
from .simulator import NoiseSpec
from .srem import SremContext, SremRecord, enumerate_snippets, run_cascade
from .transpiler import DeviceProfile, load_device, transpile
from .vqe import OptimizeSpec, minimize

__all__ = [
    "Manifest",
    "PipelineError",
    "EmptySelection",
    "OptimizerFailure",
    "cmd_select",
    "cmd_labels",
    "cmd_train",
    "cmd_mitigate",
    "cmd_sweep_noise",
    "default_grid",
    "read_csv",
]

log = logging.getLogger("gnm")


class PipelineError(Exception):
    exit_code = 1


class EmptySelection(PipelineError):
    exit_code = 2


class OptimizerFailure(PipelineError):
    exit_code = 3


class InputError(PipelineError):
    exit_code = 4


def default_grid() -> list[tuple[float, float]]:
    """Five log-spaced points from (1e-4, 1e-3) to (1e-3, 1e-2)."""
    return [(float(p2 / 10), float(p2)) for p2 in np.logspace(-3, -2, 5)]


@dataclass(frozen=True)
class Manifest:
    hamiltonian_path: Path
    device_path: Path
    output_dir: Path
    noise: str | tuple[float, float] = "device"
    epsilon: float = DEFAULT_EPSILON
    label_kind: str = "srem"
    seed: int = 42
    max_3p_snippets: int | None = None
    oracle: bool = False
    k: int = 16
    learning_rate: float = 1e-3
    epochs: int = 100
    grid: tuple[tuple[float, float], ...] = field(default_factory=lambda: tuple(default_grid()))

    def __post_init__(self):
        if self.label_kind not in ("ideal", "srem"):
            raise InputError(f"label_kind must be 'ideal' or 'srem', got {self.label_kind!r}")
        if self.label_kind == "ideal" and not self.oracle:
            raise InputError("label_kind 'ideal' requires oracle mode")
        if self.epsilon <= 0:
            raise InputError("epsilon must be positive")
        if self.noise != "device":
            p1, p2 = self.noise
            if not (0 <= p1 <= 1 and 0 <= p2 <= 1):
                raise InputError(f"noise probabilities {self.noise} outside [0, 1]")

    @classmethod
    def load(cls, path: str | Path, **overrides) -> Manifest:
        path = Path(path)
        try:
            raw = path.read_text(encoding="utf-8")
            doc = json.loads(raw)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read manifest {path}: {exc}") from exc
        base = path.parent

        def resolve(p):
            p = Path(p)
            return p if p.is_absolute() else base / p

        noise = doc.get("noise", "device")
        if noise != "device":
            noise = (float(noise["p1"]), float(noise["p2"]))
        grid = doc.get("sweep_grid")
        kwargs = dict(
            hamiltonian_path=resolve(doc["hamiltonian"]),
            device_path=resolve(doc["device"]),
            output_dir=resolve(doc.get("output_dir", "out")),
            noise=noise,
            epsilon=float(doc.get("epsilon", DEFAULT_EPSILON)),
            label_kind=doc.get("label_kind", "srem"),
            seed=int(doc.get("seed", 42)),
            max_3p_snippets=doc.get("max_3p_snippets"),
            oracle=bool(doc.get("oracle", False)),
            k=int(doc.get("k", 16)),
            learning_rate=float(doc.get("lr", 1e-3)),
            epochs=int(doc.get("epochs", 100)),
            grid=tuple(default_grid() if grid is None else [(float(a), float(b)) for a, b in grid]),
        )
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        for key in ("hamiltonian_path", "device_path"):
            if not kwargs[key].exists():
                raise InputError(f"missing input file {kwargs[key]}")
        return cls(**kwargs)

    # -- loaded inputs ----------------------------------------------------
    def hamiltonian(self) -> QubitHamiltonian:
        try:
            return load_hamiltonian(self.hamiltonian_path)
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise InputError(f"cannot read Hamiltonian {self.hamiltonian_path}: {exc}") from exc

    def device(self) -> DeviceProfile:
        """Device whose error rates are the ones actually simulated."""
        try:
            dev = load_device(self.device_path)
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise InputError(f"cannot read device {self.device_path}: {exc}") from exc
        if self.noise == "device":
            return dev
        return dev.with_uniform_noise(*self.noise)

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def settings(self) -> dict:
        """Everything except paths that influences results, for hashing."""
        return {
            "noise": self.noise,
            "epsilon": self.epsilon,
            "label_kind": self.label_kind,
            "seed": self.seed,
            "max_3p_snippets": self.max_3p_snippets,
            "oracle": self.oracle,
            "k": self.k,
            "lr": self.learning_rate,
            "epochs": self.epochs,
            "grid": self.grid,
        }


# -- file helpers -------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def input_hash(manifest: Manifest, extra: Sequence[Path] = ()) -> str:
    h = hashlib.sha256()
    for p in (manifest.hamiltonian_path, manifest.device_path, *extra):
        h.update(Path(p).read_bytes())
    h.update(json.dumps(manifest.settings(), sort_keys=True).encode())
    return h.hexdigest()[:16]


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence], manifest: Manifest,
              extra: Sequence[Path] = ()) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    buf.write(f"# seed={manifest.seed} input_hash={input_hash(manifest, extra)} version={__version__}\n")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")


def read_csv(path: str | Path) -> list[dict]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise InputError(f"missing {what}: {path}")
    return path


# -- stages -------------------------------------------------------------------


def select_ansatz(h: QubitHamiltonian, device: DeviceProfile, epsilon: float) -> AnsatzSpec:
    pool = build_pool(h)
    records = screen_doubles(pool, h, device, device.noise(), epsilon)
    spec = assemble(records, pool, h)
    if spec.n_doubles == 0:
        # singles alone leave the reference stationary; an ansatz without doubles is empty
        spec = AnsatzSpec((), 0, 0, spec.screening)
    return spec


def cmd_select(manifest: Manifest) -> AnsatzSpec:
    h, device = manifest.hamiltonian(), manifest.device()
    spec = select_ansatz(h, device, manifest.epsilon)
    manifest.output_dir.mkdir(parents=True, exist_ok=True)
    spec.save(manifest.path("ansatz.json"))
    rows = [(r.op.label, r.E_I, r.E_I0, r.stabilization, int(r.selected)) for r in spec.screening]
    write_csv(manifest.path("screening.csv"), ("op", "E_I", "E_I0", "stabilization", "selected"), rows, manifest)
    if spec.n_doubles == 0:
        raise EmptySelection(f"no double passed the screen at epsilon={manifest.epsilon}")
    return spec


def _load_ansatz(manifest: Manifest) -> AnsatzSpec:
    path = _require(manifest.path("ansatz.json"), "ansatz (run `gnm select` first)")
    try:
        spec = AnsatzSpec.load(path)
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not spec.ops:
        raise EmptySelection("the ansatz is empty")
    return spec


def generate_labels(manifest: Manifest, h: QubitHamiltonian, device: DeviceProfile,
                    spec: AnsatzSpec) -> tuple[list[SremRecord], list[TrainingSample]]:
    snippets = enumerate_snippets(spec, manifest.max_3p_snippets, manifest.seed)
    ctx = SremContext(h, device, device.noise(), oracle=manifest.oracle)
    records = run_cascade(snippets, ctx)
    failed = sum(not r.converged for r in records)
    if failed * 2 > len(records):
        raise OptimizerFailure(f"{failed} of {len(records)} snippet optimizations did not converge")
    samples = []
    for r in records:
        if not r.converged:
            continue
        label = r.E_ideal if manifest.label_kind == "ideal" else r.E_srem
        samples.append(TrainingSample(build_graph(r.transpiled, device), build_features(r.transpiled, r.E_noisy),
                                      label, manifest.label_kind, r.snippet.label))
    return records, samples


def cmd_labels(manifest: Manifest) -> list[SremRecord]:
    h, device = manifest.hamiltonian(), manifest.device()
    spec = _load_ansatz(manifest)
    records, samples = generate_labels(manifest, h, device, spec)
    save_samples(samples, manifest.path("training.jsonl"))
    rows = [
        (
            " ".join(map(str, r.op_indices)),
            r.n_params,
            r.E_noisy,
            r.E_srem,
            r.E_ideal,
            json.dumps([float(t) for t in r.theta_noisy]),
            int(r.converged),
        )
        for r in records
    ]
    write_csv(manifest.path("labels.csv"),
              ("op_indices", "n_params", "E_noisy", "E_srem", "E_ideal", "thetas", "converged"),
              rows, manifest, [manifest.path("ansatz.json")])
    return records


def _train_config(manifest: Manifest) -> TrainConfig:
    return TrainConfig(epochs=manifest.epochs, learning_rate=manifest.learning_rate, k=manifest.k, seed=manifest.seed)


def cmd_train(manifest: Manifest) -> TrainResult:
    path = _require(manifest.path("training.jsonl"), "training set (run `gnm labels` first)")
    samples = load_samples(path)
    if not samples:
        raise PipelineError("the training set is empty")
    result = train(samples, _train_config(manifest))
    save_model(result, manifest.path("model.json"))
    write_csv(manifest.path("loss.csv"), ("epoch", "mean_huber_loss"), list(enumerate(result.history)),
              manifest, [path])
    return result


@dataclass(frozen=True)
class Mitigation:
    E_noisy: float
    E_pred: float
    E_ideal: float | None
    converged: bool


def mitigate(model: TrainResult, h: QubitHamiltonian, device: DeviceProfile, spec: AnsatzSpec,
             oracle: bool, label_kind: str = "srem") -> Mitigation:
    tc = transpile(spec.circuit(h.n_qubits), device)
    n = len(spec.ops)
    noisy = minimize(tc.circuit, h, device.noise(), OptimizeSpec.all_free(n))
    sample = TrainingSample(build_graph(tc, device), build_features(tc, noisy.energy), 0.0, label_kind)
    e_pred = predict(model.params, model.scaler, sample)
    e_ideal = None
    if oracle:
        e_ideal = minimize(tc.circuit, h, NoiseSpec.ideal(), OptimizeSpec.all_free(n)).energy
    return Mitigation(noisy.energy, e_pred, e_ideal, noisy.converged)


def _mitigation_row(m: Mitigation) -> tuple:
    d_noisy = None if m.E_ideal is None else m.E_noisy - m.E_ideal
    d_pred = None if m.E_ideal is None else m.E_pred - m.E_ideal
    return (m.E_noisy, m.E_pred, m.E_ideal, d_noisy, d_pred, int(m.converged))


def cmd_mitigate(manifest: Manifest) -> Mitigation:
    h, device = manifest.hamiltonian(), manifest.device()
    spec = _load_ansatz(manifest)
    model_path = _require(manifest.path("model.json"), "model (run `gnm train` first)")
    result = mitigate(load_model(model_path), h, device, spec, manifest.oracle, manifest.label_kind)
    write_csv(manifest.path("result.csv"),
              ("E_noisy", "E_pred", "E_ideal", "delta_noisy", "delta_pred", "converged"),
              [_mitigation_row(result)], manifest, [manifest.path("ansatz.json"), model_path])
    return result


def cmd_sweep_noise(manifest: Manifest) -> list[tuple[float, float, Mitigation]]:
    """Full labels-train-mitigate pipeline at each grid point with one fixed ansatz.

    The ansatz is read from the output directory when present and otherwise
    selected under the manifest's own noise setting.
    """
    h = manifest.hamiltonian()
    if manifest.path("ansatz.json").exists():
        spec = _load_ansatz(manifest)
    else:
        spec = cmd_select(manifest)
    base = load_device(manifest.device_path)
    out = []
    for p1, p2 in manifest.grid:
        point = replace(manifest, noise=(p1, p2))
        device = base.with_uniform_noise(p1, p2)
        log.info("sweep point p1=%g p2=%g", p1, p2)
        _, samples = generate_labels(point, h, device, spec)
        model = train(samples, _train_config(manifest))
        out.append((p1, p2, mitigate(model, h, device, spec, manifest.oracle, manifest.label_kind)))
    rows = [(p1, p2, m.E_noisy, m.E_pred, m.E_ideal) for p1, p2, m in out]
    write_csv(manifest.path("sweep.csv"), ("p1", "p2", "E_noisy", "E_pred", "E_ideal"), rows, manifest,
              [manifest.path("ansatz.json")])
    return out
