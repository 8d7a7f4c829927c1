"""Aggregator-side defenses.

Three hooks, each attacking a different lever the adversary relies on:
fine-tuning every incoming update on a small balanced holdout before
aggregation, spacing out how often any one client can be selected (see
fedcore's scheduler), and publishing a distorted class histogram so a
distribution-matching attacker aims at the wrong target. A cosine monitor
logs per-update last-layer similarity against the previous global model;
it observes and never excludes.
"""
from __future__ import annotations

import dataclasses
import logging

import numpy as np

from . import nn
from .datagen import Dataset
from .errors import CapacityError, ConfigError
from .partition import class_histogram, distance, histogram_at_distance
from .rng import substream

logger = logging.getLogger(__name__)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; either vector all-zero gives 0 with a warning."""
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        logger.warning("cosine of a zero vector defined as 0.0")
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def cosine_monitor(update, prev_global: nn.ModelParams) -> float:
    """Similarity of the update's last dense layer to the previous global's."""
    return cosine(
        nn.flatten_last_layer(update.params), nn.flatten_last_layer(prev_global)
    )


def reserve_iid_set(train: Dataset, fraction: float, seed: int):
    """Class-stratified holdout; returns (holdout, remaining train).

    Reserves round(fraction * n) samples apportioned across classes by
    their frequency, so the holdout mirrors the training distribution.
    Every class must keep at least one sample on both sides.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    n = len(train)
    total = int(round(fraction * n))
    if total < train.num_classes:
        raise CapacityError(
            f"fraction {fraction} reserves {total} samples, fewer than "
            f"{train.num_classes} classes"
        )
    rng = substream(seed)
    counts = np.bincount(train.labels, minlength=train.num_classes)
    raw = counts * fraction
    quota = np.floor(raw).astype(np.int64)
    short = total - quota.sum()
    if short > 0:
        order = np.lexsort((np.arange(len(raw)), -(raw - quota)))
        quota[order[:short]] += 1
    take = []
    for k, q in enumerate(quota):
        if counts[k] == 0:
            raise CapacityError(f"training pool has no samples of class {k}")
        if q == 0:
            raise CapacityError(f"fraction {fraction} reserves nothing of class {k}")
        if q >= counts[k]:
            raise CapacityError(f"fraction {fraction} would drain class {k} from training")
        idx = np.flatnonzero(train.labels == k)
        take.append(idx[rng.permutation(len(idx))[:q]])
    reserved = np.sort(np.concatenate(take))
    mask = np.ones(n, dtype=bool)
    mask[reserved] = False
    return train.subset(reserved), train.subset(np.flatnonzero(mask))


def active_defense(updates, iid_set: Dataset, retrain_epochs: int, lr: float,
                   batch_size: int, seed: int):
    """Fine-tune each incoming update on the balanced holdout before aggregation.

    Returns new updates in the same order; ids and sample counts are kept.
    The holdout must look class-balanced (chisq to uniform below 0.05) or
    the defense would itself bias the model.
    """
    if retrain_epochs < 0:
        raise ValueError(f"retrain_epochs must be >= 0, got {retrain_epochs}")
    if len(iid_set) == 0:
        raise ConfigError("active defense needs a non-empty holdout")
    uniform = np.full(iid_set.num_classes, 1.0 / iid_set.num_classes)
    gap = distance(class_histogram(iid_set.labels, iid_set.num_classes), uniform, "chisq")
    if gap >= 0.05:
        raise ConfigError(f"holdout is not class-balanced (chisq to uniform {gap:.3f})")
    out = []
    for u in updates:
        rng = substream(seed, u.client_id)
        p = u.params
        for _ in range(retrain_epochs):
            perm = rng.permutation(len(iid_set))
            p = nn.sgd_epoch(p, iid_set.features[perm], iid_set.labels[perm], batch_size, lr)
        out.append(dataclasses.replace(u, params=p))
    return out


def fake_distribution(true_hist: np.ndarray, chisq_offset: float, seed: int,
                      tol: float = 0.02) -> np.ndarray:
    """Histogram the aggregator discloses instead of the real one.

    Sits chisq_offset away from the truth, so an attacker matching the
    disclosed mix lands that far from the distribution that matters.
    """
    if chisq_offset < 0:
        raise ValueError(f"chisq_offset must be >= 0, got {chisq_offset}")
    return histogram_at_distance(true_hist, chisq_offset, tol=tol, seed=seed)
