"""Small MLP trained from scratch: Glorot init, ReLU, softmax cross-entropy.

All parameters live in one flat float64 vector (see kernels for the
layout); ops here validate, delegate the numeric work to the selected
kernel backend, and keep value semantics (no op mutates its inputs).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .rng import substream


@dataclass
class ModelParams:
    arch: tuple  # layer widths, e.g. (20, 32, 10)
    flat: np.ndarray  # (P,) float64

    def __post_init__(self):
        self.arch = tuple(int(a) for a in self.arch)
        if len(self.arch) < 2 or any(a < 1 for a in self.arch):
            raise ValueError(f"arch must list >= 2 positive widths, got {self.arch}")
        self.flat = np.asarray(self.flat, dtype=np.float64)
        expect = kernels.num_params(self.arch)
        if self.flat.shape != (expect,):
            raise ValueError(f"flat vector must have {expect} entries, got {self.flat.shape}")

    @property
    def dims(self) -> np.ndarray:
        return np.asarray(self.arch, dtype=np.int64)

    @property
    def num_params(self) -> int:
        return self.flat.shape[0]

    def copy(self) -> "ModelParams":
        return ModelParams(self.arch, self.flat.copy())

    def layers(self):
        """List of (W, b) views, W shaped (out, in)."""
        Ws, bs = kernels._views(self.flat, self.dims)
        return list(zip(Ws, bs))


@dataclass
class TrainingConfig:
    learning_rate: float
    batch_size: int
    local_epochs: int
    seed: int

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.local_epochs < 0:
            raise ValueError(f"local_epochs must be >= 0, got {self.local_epochs}")


def init_mlp(arch, seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases, layer by layer from one stream."""
    arch = tuple(int(a) for a in arch)
    if len(arch) < 2 or any(a < 1 for a in arch):
        raise ValueError(f"arch must list >= 2 positive widths, got {arch}")
    rng = substream(seed)
    chunks = []
    for l in range(len(arch) - 1):
        fan_in, fan_out = arch[l], arch[l + 1]
        a = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-a, a, size=fan_out * fan_in))
        chunks.append(np.zeros(fan_out))
    return ModelParams(arch, np.concatenate(chunks))


def _check_batch(p: ModelParams, X: np.ndarray, y: np.ndarray | None = None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != p.arch[0]:
        raise ValueError(f"batch must be (n, {p.arch[0]}), got {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("batch must be non-empty")
    if y is None:
        return X
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (X.shape[0],):
        raise ValueError("labels must be one per row")
    if y.min() < 0 or y.max() >= p.arch[-1]:
        raise ValueError(f"labels must lie in [0, {p.arch[-1]})")
    return X, y


def forward(p: ModelParams, X: np.ndarray) -> np.ndarray:
    """Logits, shape (n, num_classes)."""
    X = _check_batch(p, X)
    return kernels.forward_logits(p.flat, p.dims, X)


def predict(p: ModelParams, features: np.ndarray):
    """Predicted class for one feature vector, or a vector of them for a matrix.

    Ties break toward the smaller class index.
    """
    features = np.asarray(features, dtype=np.float64)
    single = features.ndim == 1
    X = features[None, :] if single else features
    logits = forward(p, X)
    preds = np.argmax(logits, axis=1)
    return int(preds[0]) if single else preds


def loss_and_grads(p: ModelParams, X: np.ndarray, y: np.ndarray):
    """Mean cross-entropy over the batch; gradient packed like the params."""
    X, y = _check_batch(p, X, y)
    loss, grad = kernels.loss_and_grad_flat(p.flat, p.dims, X, y)
    return loss, ModelParams(p.arch, grad)


def sgd_step(p: ModelParams, grads: ModelParams, lr: float) -> ModelParams:
    if p.arch != grads.arch:
        raise ValueError(f"param/grad arch mismatch: {p.arch} vs {grads.arch}")
    if lr < 0:
        raise ValueError(f"lr must be >= 0, got {lr}")
    return ModelParams(p.arch, p.flat - lr * grads.flat)


def sgd_epoch(p: ModelParams, X: np.ndarray, y: np.ndarray,
              batch_size: int, lr: float) -> ModelParams:
    """One pass of mini-batch SGD in the given sample order; returns new params."""
    X, y = _check_batch(p, X, y)
    out = p.copy()
    kernels.run_sgd_epoch(out.flat, out.dims, X, y, batch_size, lr)
    return out


def finite_diff_check(p: ModelParams, X: np.ndarray, y: np.ndarray,
                      eps: float = 1e-5, max_probes: int = 64,
                      grads: ModelParams | None = None) -> float:
    """Worst relative gap between analytic and central-difference gradients.

    Probes an evenly spaced subset of at most max_probes parameters. The
    analytic gradient may be injected (grads) so a corrupted gradient can
    be checked against the honest loss surface.
    """
    X, y = _check_batch(p, X, y)
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if grads is None:
        _, grads = loss_and_grads(p, X, y)
    P = p.num_params
    step = max(1, P // max_probes)
    worst = 0.0
    flat = p.flat.copy()
    for idx in range(0, P, step):
        orig = flat[idx]
        flat[idx] = orig + eps
        up, _ = kernels.loss_and_grad_flat(flat, p.dims, X, y)
        flat[idx] = orig - eps
        down, _ = kernels.loss_and_grad_flat(flat, p.dims, X, y)
        flat[idx] = orig
        numeric = (up - down) / (2 * eps)
        rel = abs(grads.flat[idx] - numeric) / (abs(grads.flat[idx]) + eps)
        worst = max(worst, rel)
    return worst


def flatten_last_layer(p: ModelParams) -> np.ndarray:
    """Final dense layer (weights row-major, then bias) as one vector."""
    out, inn = p.arch[-1], p.arch[-2]
    return p.flat[p.num_params - out * inn - out :].copy()


def save_params_csv(p: ModelParams, path: str) -> None:
    """Checkpoint format: architecture header line, then one value per line."""
    with open(path, "w") as f:
        f.write(",".join(str(a) for a in p.arch) + "\n")
        for v in p.flat:
            f.write(repr(float(v)) + "\n")


def load_params_csv(path: str) -> ModelParams:
    with open(path) as f:
        arch = tuple(int(a) for a in f.readline().strip().split(","))
        flat = np.array([float(line) for line in f if line.strip()], dtype=np.float64)
    return ModelParams(arch, flat)
