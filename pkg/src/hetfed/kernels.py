"""Numeric kernels for MLP training.

Two interchangeable implementations of the same math: a numba-jitted one
(explicit loops, compiled) and a pure numpy one (vectorized). The active
backend is chosen once at import from the HETFED_BACKEND environment
variable ("numba" or "numpy"); unset means numba when importable, numpy
otherwise. Both backends are deterministic; they are not bitwise identical
to each other because summation order differs, so a given experiment must
be reproduced under the backend that produced it.

Parameters live in one flat float64 vector laid out layer by layer: the
(out x in) weight matrix row-major, then the bias. `dims` is the layer
width vector, e.g. [20, 32, 10] for a 20-in, one-hidden-layer, 10-class
net. Hidden activations are ReLU, the loss is mean softmax cross-entropy
computed via log-sum-exp.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - sandbox always has numba
    HAS_NUMBA = False


# ---------------- pure numpy backend ---------------- #


def _views(flat: np.ndarray, dims: np.ndarray):
    """Weight/bias views into the flat vector, no copies."""
    Ws, bs = [], []
    off = 0
    for l in range(len(dims) - 1):
        inn, out = int(dims[l]), int(dims[l + 1])
        Ws.append(flat[off : off + out * inn].reshape(out, inn))
        off += out * inn
        bs.append(flat[off : off + out])
        off += out
    return Ws, bs


def num_params(dims) -> int:
    return int(sum(dims[l + 1] * dims[l] + dims[l + 1] for l in range(len(dims) - 1)))


def forward_np(flat: np.ndarray, dims: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Logits for a batch, shape (n, dims[-1])."""
    Ws, bs = _views(flat, dims)
    a = X
    last = len(Ws) - 1
    for l, (W, b) in enumerate(zip(Ws, bs)):
        z = a @ W.T + b
        a = z if l == last else np.maximum(z, 0.0)
    return a


def loss_grad_np(flat, dims, X, y, grad):
    """Mean cross-entropy loss; analytic gradient written into `grad`."""
    Ws, bs = _views(flat, dims)
    L = len(Ws)
    n = X.shape[0]
    acts = [X]
    a = X
    for l, (W, b) in enumerate(zip(Ws, bs)):
        z = a @ W.T + b
        a = z if l == L - 1 else np.maximum(z, 0.0)
        acts.append(a)
    logits = acts[-1]
    m = logits.max(axis=1, keepdims=True)
    ex = np.exp(logits - m)
    se = ex.sum(axis=1, keepdims=True)
    lse = (m + np.log(se)).ravel()
    rows = np.arange(n)
    loss = float(np.mean(lse - logits[rows, y]))
    delta = ex / se
    delta[rows, y] -= 1.0
    delta /= n
    gWs, gbs = _views(grad, dims)
    for l in range(L - 1, -1, -1):
        gWs[l][:] = delta.T @ acts[l]
        gbs[l][:] = delta.sum(axis=0)
        if l > 0:
            # ReLU mask: activation > 0 iff pre-activation > 0
            delta = (delta @ Ws[l]) * (acts[l] > 0.0)
    return loss


def sgd_epoch_np(flat, dims, X, y, batch_size, lr):
    """One pass of mini-batch SGD over (X, y) in order, updating flat in place."""
    n = X.shape[0]
    grad = np.empty_like(flat)
    start = 0
    while start < n:
        stop = min(start + batch_size, n)
        loss_grad_np(flat, dims, X[start:stop], y[start:stop], grad)
        flat -= lr * grad
        start = stop


# ---------------- numba backend ---------------- #

if HAS_NUMBA:

    @njit(cache=True)
    def _offsets(dims):
        L = dims.shape[0] - 1
        offs_w = np.empty(L, np.int64)
        offs_b = np.empty(L, np.int64)
        off = 0
        for l in range(L):
            offs_w[l] = off
            off += dims[l + 1] * dims[l]
            offs_b[l] = off
            off += dims[l + 1]
        return offs_w, offs_b

    @njit(cache=True)
    def forward_nb(flat, dims, X):
        L = dims.shape[0] - 1
        n = X.shape[0]
        offs_w, offs_b = _offsets(dims)
        maxw = 0
        for i in range(L + 1):
            if dims[i] > maxw:
                maxw = dims[i]
        cur = np.empty((n, maxw))
        nxt = np.empty((n, maxw))
        for i in range(n):
            for j in range(dims[0]):
                cur[i, j] = X[i, j]
        for l in range(L):
            inn = dims[l]
            out = dims[l + 1]
            ow = offs_w[l]
            ob = offs_b[l]
            for i in range(n):
                for o in range(out):
                    s = flat[ob + o]
                    base = ow + o * inn
                    for j in range(inn):
                        s += cur[i, j] * flat[base + j]
                    if l < L - 1 and s < 0.0:
                        s = 0.0
                    nxt[i, o] = s
            tmp = cur
            cur = nxt
            nxt = tmp
        logits = np.empty((n, dims[L]))
        for i in range(n):
            for o in range(dims[L]):
                logits[i, o] = cur[i, o]
        return logits

    @njit(cache=True)
    def loss_grad_nb(flat, dims, X, y, grad):
        L = dims.shape[0] - 1
        n = X.shape[0]
        offs_w, offs_b = _offsets(dims)
        maxw = 0
        for i in range(L + 1):
            if dims[i] > maxw:
                maxw = dims[i]
        acts = np.zeros((L + 1, n, maxw))
        for i in range(n):
            for j in range(dims[0]):
                acts[0, i, j] = X[i, j]
        for l in range(L):
            inn = dims[l]
            out = dims[l + 1]
            ow = offs_w[l]
            ob = offs_b[l]
            for i in range(n):
                for o in range(out):
                    s = flat[ob + o]
                    base = ow + o * inn
                    for j in range(inn):
                        s += acts[l, i, j] * flat[base + j]
                    if l < L - 1 and s < 0.0:
                        s = 0.0
                    acts[l + 1, i, o] = s
        C = dims[L]
        delta = np.zeros((n, maxw))
        loss = 0.0
        for i in range(n):
            m = acts[L, i, 0]
            for o in range(1, C):
                if acts[L, i, o] > m:
                    m = acts[L, i, o]
            se = 0.0
            for o in range(C):
                se += np.exp(acts[L, i, o] - m)
            loss += m + np.log(se) - acts[L, i, y[i]]
            for o in range(C):
                p = np.exp(acts[L, i, o] - m) / se
                if o == y[i]:
                    p -= 1.0
                delta[i, o] = p / n
        loss /= n
        nxt = np.zeros((n, maxw))
        for l in range(L - 1, -1, -1):
            inn = dims[l]
            out = dims[l + 1]
            ow = offs_w[l]
            ob = offs_b[l]
            for o in range(out):
                gb = 0.0
                for i in range(n):
                    gb += delta[i, o]
                grad[ob + o] = gb
                base = ow + o * inn
                for j in range(inn):
                    gw = 0.0
                    for i in range(n):
                        gw += delta[i, o] * acts[l, i, j]
                    grad[base + j] = gw
            if l > 0:
                for i in range(n):
                    for j in range(inn):
                        if acts[l, i, j] > 0.0:
                            s = 0.0
                            for o in range(out):
                                s += delta[i, o] * flat[ow + o * inn + j]
                            nxt[i, j] = s
                        else:
                            nxt[i, j] = 0.0
                tmp = delta
                delta = nxt
                nxt = tmp
        return loss

    @njit(cache=True)
    def sgd_epoch_nb(flat, dims, X, y, batch_size, lr):
        n = X.shape[0]
        P = flat.shape[0]
        grad = np.empty(P)
        start = 0
        while start < n:
            stop = min(start + batch_size, n)
            loss_grad_nb(flat, dims, X[start:stop], y[start:stop], grad)
            for p in range(P):
                flat[p] -= lr * grad[p]
            start = stop

else:  # pragma: no cover
    forward_nb = None
    loss_grad_nb = None
    sgd_epoch_nb = None


# ---------------- backend selection ---------------- #

BACKEND_ENV = "HETFED_BACKEND"


def _resolve_backend() -> str:
    choice = os.environ.get(BACKEND_ENV, "").strip().lower()
    if choice in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            raise ImportError("HETFED_BACKEND=numba but numba is not importable")
        return "numba"
    raise ValueError(f"unknown {BACKEND_ENV}={choice!r}, expected 'numba' or 'numpy'")


BACKEND = _resolve_backend()

if BACKEND == "numba":
    _forward_impl = forward_nb
    _loss_grad_impl = loss_grad_nb
    _sgd_epoch_impl = sgd_epoch_nb
else:
    _forward_impl = forward_np
    _loss_grad_impl = loss_grad_np
    _sgd_epoch_impl = sgd_epoch_np


def _prep(flat, dims, X, y=None):
    flat = np.ascontiguousarray(flat, dtype=np.float64)
    dims = np.ascontiguousarray(dims, dtype=np.int64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    if y is None:
        return flat, dims, X
    return flat, dims, X, np.ascontiguousarray(y, dtype=np.int64)


def forward_logits(flat, dims, X) -> np.ndarray:
    flat, dims, X = _prep(flat, dims, X)
    return _forward_impl(flat, dims, X)


def loss_and_grad_flat(flat, dims, X, y):
    """Returns (loss, flat gradient) for the whole batch."""
    flat, dims, X, y = _prep(flat, dims, X, y)
    grad = np.empty_like(flat)
    loss = _loss_grad_impl(flat, dims, X, y, grad)
    return float(loss), grad


def run_sgd_epoch(flat, dims, X, y, batch_size, lr) -> None:
    """In-place mini-batch SGD pass over (X, y); caller owns shuffling."""
    dims = np.ascontiguousarray(dims, dtype=np.int64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    _sgd_epoch_impl(flat, dims, X, y, int(batch_size), float(lr))
