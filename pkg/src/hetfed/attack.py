"""Backdoor attack machinery: poison plans, trigger splitting, data resampling.

A poison plan says how many samples of each local mini-batch get the
trigger during one local epoch. Timing strategies place the same budget
differently across the batch sequence, which is what separates an attack
the aggregator averages away from one that rides out of the final SGD
steps intact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datagen import Dataset, TriggerPattern, apply_trigger_to_matrix
from .errors import InfeasibleError
from .partition import class_histogram

TIMINGS = ("evenly", "first_k", "middle_k", "last_k", "last")


@dataclass(frozen=True)
class PoisonPlan:
    per_batch_counts: tuple  # poisoned samples per batch, one local epoch
    pattern: TriggerPattern

    def __post_init__(self):
        object.__setattr__(self, "per_batch_counts", tuple(int(c) for c in self.per_batch_counts))
        if not self.per_batch_counts:
            raise ValueError("plan needs at least one batch")
        if any(c < 0 for c in self.per_batch_counts):
            raise ValueError("per-batch counts must be >= 0")

    @property
    def budget(self) -> int:
        return sum(self.per_batch_counts)


def _spread(budget: int, slots: int) -> list:
    """Budget over slots as evenly as possible, remainder to the earliest."""
    base, rem = divmod(budget, slots)
    return [base + (1 if i < rem else 0) for i in range(slots)]


def build_poison_plan(timing: str, budget: int, num_batches: int, batch_size: int,
                      pattern: TriggerPattern, k: int | None = None,
                      last_batch_size: int | None = None) -> PoisonPlan:
    """Distribute a local budget over the batch sequence.

    evenly spreads across all batches; first_k / middle_k / last_k spread
    across a k-batch window at the start, middle, or end; last puts the
    whole budget in the final batch. The final batch may be shorter than
    batch_size (pass last_batch_size), and no batch may be asked to poison
    more samples than it holds.
    """
    if timing not in TIMINGS:
        raise ValueError(f"unknown timing {timing!r}, expected one of {TIMINGS}")
    if num_batches < 1:
        raise ValueError(f"num_batches must be >= 1, got {num_batches}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    counts = [0] * num_batches
    if timing == "evenly":
        counts = _spread(budget, num_batches)
    elif timing == "last":
        counts[-1] = budget
    else:
        if k is None:
            raise ValueError(f"timing {timing!r} needs k")
        if not 1 <= k <= num_batches:
            raise ValueError(f"k must be in [1, {num_batches}], got {k}")
        if timing == "first_k":
            start = 0
        elif timing == "last_k":
            start = num_batches - k
        else:
            start = (num_batches - k) // 2
        for i, c in enumerate(_spread(budget, k)):
            counts[start + i] = c
    sizes = [batch_size] * num_batches
    if last_batch_size is not None:
        if not 1 <= last_batch_size <= batch_size:
            raise ValueError(f"last_batch_size must be in [1, {batch_size}]")
        sizes[-1] = last_batch_size
    for b, (c, s) in enumerate(zip(counts, sizes)):
        if c > s:
            raise InfeasibleError(
                f"batch {b} holds {s} samples but the plan wants {c} poisoned; "
                f"budget {budget} does not fit timing {timing!r}"
            )
    return PoisonPlan(tuple(counts), pattern)


def split_trigger(pattern: TriggerPattern, parts: int) -> list:
    """Disjoint sub-patterns (entries dealt round-robin) covering the original."""
    if not 1 <= parts <= len(pattern.entries):
        raise ValueError(
            f"parts must be in [1, {len(pattern.entries)}], got {parts}"
        )
    return [
        TriggerPattern(pattern.entries[i::parts], pattern.target_class)
        for i in range(parts)
    ]


def poison_batch(X: np.ndarray, y: np.ndarray, count: int, pattern: TriggerPattern,
                 rng: np.random.Generator) -> tuple:
    """Replace `count` rng-chosen rows with their triggered versions."""
    n = X.shape[0]
    if not 0 <= count <= n:
        raise ValueError(f"count must be in [0, {n}], got {count}")
    Xp, yp = X.copy(), y.copy()
    if count == 0:
        return Xp, yp
    pos = rng.choice(n, size=count, replace=False)
    Xp[pos] = apply_trigger_to_matrix(X[pos], pattern)
    yp[pos] = pattern.target_class
    return Xp, yp


def _largest_remainder(weights: np.ndarray, total: int) -> np.ndarray:
    """Integer apportionment of `total` by weight, ties to the smaller index."""
    raw = weights * total
    counts = np.floor(raw).astype(np.int64)
    rem = total - counts.sum()
    if rem > 0:
        order = np.lexsort((np.arange(len(weights)), -(raw - counts)))
        counts[order[:rem]] += 1
    return counts


def resample_client_data(pool: Dataset, hist: np.ndarray, size: int, seed: int) -> np.ndarray:
    """Indices into `pool` whose class mix matches `hist` within rounding.

    Draws without replacement per class when the pool allows it, falling
    back to replacement when a class is over-requested; a class requested
    from an empty pool is infeasible.
    """
    from .rng import substream

    hist = np.asarray(hist, dtype=np.float64)
    if hist.shape != (pool.num_classes,):
        raise ValueError(f"histogram must have {pool.num_classes} bins, got {hist.shape}")
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    hist = hist / hist.sum()
    counts = _largest_remainder(hist, size)
    rng = substream(seed)
    picked = []
    for k, c in enumerate(counts):
        if c == 0:
            continue
        avail = np.flatnonzero(pool.labels == k)
        if len(avail) == 0:
            raise InfeasibleError(f"pool has no samples of class {k} but {c} were requested")
        replace = c > len(avail)
        picked.append(rng.choice(avail, size=c, replace=replace))
    out = np.concatenate(picked)
    return out[rng.permutation(len(out))]


def measured_mix_error(pool: Dataset, indices: np.ndarray, hist: np.ndarray) -> float:
    """Chisq gap between an index set's class mix and its target histogram."""
    from .partition import distance

    got = class_histogram(pool.labels[indices], pool.num_classes)
    return distance(got, hist, "chisq")
