"""The graph-network mitigator: two graph convolutions feeding a one-hidden-layer regressor.

Gradients are written out by hand; :func:`loss_and_grad` is checked against
finite differences in the test suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import Scaler, TrainingSample, standardize

__all__ = [
    "GnmParameters",
    "TrainConfig",
    "TrainResult",
    "init_params",
    "forward",
    "huber_loss",
    "huber_grad",
    "loss_and_grad",
    "select_delta",
    "train",
    "predict",
    "save_model",
    "load_model",
]

PARAM_NAMES = ("W_g0", "W_g1", "W0", "b0", "W1", "b1")
DELTA_FLOOR = 1e-3


@dataclass
class GnmParameters:
    W_g0: np.ndarray  # n x k
    W_g1: np.ndarray  # k x 1
    W0: np.ndarray  # (n + 4) x k_r
    b0: np.ndarray  # k_r
    W1: np.ndarray  # k_r x 1
    b1: np.ndarray  # shape (1,)

    @property
    def n(self) -> int:
        return self.W_g0.shape[0]

    @property
    def k(self) -> int:
        return self.W_g0.shape[1]

    @property
    def k_r(self) -> int:
        return self.W0.shape[1]

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, name) for name in PARAM_NAMES]

    def copy(self) -> GnmParameters:
        return GnmParameters(*(a.copy() for a in self.arrays()))

    def check(self) -> None:
        n, k, kr = self.n, self.k, self.k_r
        want = {"W_g0": (n, k), "W_g1": (k, 1), "W0": (n + 4, kr), "b0": (kr,), "W1": (kr, 1), "b1": (1,)}
        for name, shape in want.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")


def init_params(n: int, k: int = 16, k_r: int = 64, seed: int = 0) -> GnmParameters:
    """Uniform(-r, r) with ``r = 1/sqrt(fan_in)`` for every weight and bias of a layer."""
    rng = np.random.default_rng(seed)

    def u(fan_in, shape):
        r = 1.0 / math.sqrt(fan_in)
        return rng.uniform(-r, r, size=shape)

    v = n + 4
    return GnmParameters(u(n, (n, k)), u(k, (k, 1)), u(v, (v, k_r)), u(v, (k_r,)), u(k_r, (k_r, 1)), u(k_r, (1,)))


def _relu(x):
    return np.maximum(x, 0.0)


def forward(params: GnmParameters, S: np.ndarray, X_g: np.ndarray, x_r: np.ndarray, cache: bool = False):
    """Standardized prediction for one graph and standardized regressor features."""
    n = params.n
    if S.shape != (n, n) or X_g.shape != (n, n) or x_r.shape != (4,):
        raise ValueError(f"input shapes {S.shape}, {X_g.shape}, {x_r.shape} do not match n={n}")
    sx = S @ X_g
    z1 = sx @ params.W_g0
    h1 = _relu(z1)
    sh = S @ h1
    z2 = sh @ params.W_g1
    h2 = _relu(z2)
    x = np.concatenate([h2[:, 0], x_r])
    z3 = x @ params.W0 + params.b0
    h3 = _relu(z3)
    out = float(h3 @ params.W1[:, 0] + params.b1[0])
    if cache:
        return out, (sx, z1, h1, sh, z2, x, z3, h3)
    return out


def huber_loss(y: float, f: float, delta: float) -> float:
    r = abs(y - f)
    if r <= delta:
        return 0.5 * r * r
    return delta * (r - 0.5 * delta)


def huber_grad(y: float, f: float, delta: float) -> float:
    """Derivative of :func:`huber_loss` with respect to the prediction ``f``."""
    r = f - y
    if abs(r) <= delta:
        return r
    return delta if r > 0 else -delta


def loss_and_grad(params: GnmParameters, S, X_g, x_r, y: float, delta: float):
    f, (sx, z1, h1, sh, z2, x, z3, h3) = forward(params, S, X_g, x_r, cache=True)
    loss = huber_loss(y, f, delta)
    g = huber_grad(y, f, delta)
    n = params.n
    gW1 = h3[:, None] * g
    gb1 = np.array([g])
    gz3 = params.W1[:, 0] * g * (z3 > 0)
    gW0 = np.outer(x, gz3)
    gb0 = gz3
    gx = params.W0 @ gz3
    gz2 = gx[:n, None] * (z2 > 0)
    gWg1 = sh.T @ gz2
    gz1 = (S.T @ (gz2 @ params.W_g1.T)) * (z1 > 0)
    gWg0 = sx.T @ gz1
    return loss, GnmParameters(gWg0, gWg1, gW0, gb0, gW1, gb1)


def select_delta(samples: Sequence[TrainingSample], scaler: Scaler) -> float:
    """Median label-to-noisy deviation in standardized label units, floored at 1e-3."""
    if not samples:
        raise ValueError("need at least one sample")
    dev = [abs(s.label - s.features.n_c) / scaler.label_std for s in samples]
    return max(float(np.median(dev)), DELTA_FLOOR)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 1
    learning_rate: float = 1e-3
    k: int = 16
    k_r: int = 64
    seed: int = 42
    delta: float | None = None  # chosen by select_delta when None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size != 1:
            raise ValueError("only batch size 1 is supported")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.delta is not None and self.delta <= 0:
            raise ValueError("delta must be positive")


@dataclass
class TrainResult:
    params: GnmParameters
    scaler: Scaler
    delta: float
    config: TrainConfig
    history: list[float] = field(default_factory=list)  # entry 0 is the loss at initialization


def _mean_loss(params, data, delta) -> float:
    total = 0.0
    for (S, X_g, x_r), y in data:
        total += huber_loss(y, forward(params, S, X_g, x_r), delta)
    return total / len(data)


def train(samples: Sequence[TrainingSample], config: TrainConfig = TrainConfig()) -> TrainResult:
    """Adam on one sample at a time, in the given order; loss recorded after every epoch."""
    if not samples:
        raise ValueError("need at least one training sample")
    if len({s.label_kind for s in samples}) != 1:
        raise ValueError("mixed label kinds in one training set")
    n = samples[0].graph.n
    if any(s.graph.n != n for s in samples):
        raise ValueError("samples come from devices of different sizes")
    std, scaler = standardize(samples)
    delta = config.delta if config.delta is not None else select_delta(samples, scaler)
    data = [((s.graph.S, s.graph.X_g, xr), y) for s, (xr, y) in zip(samples, std)]

    params = init_params(n, config.k, config.k_r, config.seed)
    m = [np.zeros_like(a) for a in params.arrays()]
    v = [np.zeros_like(a) for a in params.arrays()]
    b1, b2 = config.beta1, config.beta2
    step = 0
    history = [_mean_loss(params, data, delta)]
    for epoch in range(config.epochs):
        for (S, X_g, x_r), y in data:
            loss, grad = loss_and_grad(params, S, X_g, x_r, y, delta)
            if not math.isfinite(loss):
                raise FloatingPointError(f"non-finite loss at epoch {epoch + 1}, step {step + 1}")
            step += 1
            c1 = 1.0 - b1**step
            c2 = 1.0 - b2**step
            for a, g, mi, vi in zip(params.arrays(), grad.arrays(), m, v):
                mi *= b1
                mi += (1.0 - b1) * g
                vi *= b2
                vi += (1.0 - b2) * g * g
                a -= config.learning_rate * (mi / c1) / (np.sqrt(vi / c2) + config.eps)
        epoch_loss = _mean_loss(params, data, delta)
        if not math.isfinite(epoch_loss):
            raise FloatingPointError(f"non-finite mean loss after epoch {epoch + 1}")
        history.append(epoch_loss)
    return TrainResult(params, scaler, delta, config, history)


def predict(params: GnmParameters, scaler: Scaler | None, sample: TrainingSample) -> float:
    """Mitigated energy in hartree for a full-circuit sample."""
    if scaler is None:
        raise ValueError("a fitted scaler is required to map predictions back to hartree")
    z = forward(params, sample.graph.S, sample.graph.X_g, scaler.features(sample.features))
    return scaler.inverse_label(z)


def save_model(result: TrainResult, path: str | Path) -> None:
    p = result.params
    doc = {
        "shapes": {name: list(a.shape) for name, a in zip(PARAM_NAMES, p.arrays())},
        "weights": {name: a.ravel().tolist() for name, a in zip(PARAM_NAMES, p.arrays())},
        "scaler": result.scaler.to_dict(),
        "delta": result.delta,
        "config": asdict(result.config),
        "seed": result.config.seed,
        "history": result.history,
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TrainResult:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    arrays = [np.array(doc["weights"][name], dtype=float).reshape(doc["shapes"][name]) for name in PARAM_NAMES]
    params = GnmParameters(*arrays)
    params.check()
    return TrainResult(params, Scaler.from_dict(doc["scaler"]), float(doc["delta"]),
                       TrainConfig(**doc["config"]), list(doc["history"]))
