"""Evaluation metrics and per-round logging types."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .datagen import Dataset, TriggerPattern, apply_trigger_to_matrix
from .rng import substream

logger = logging.getLogger(__name__)

# how many trailing rounds feed the summary statistics
SUMMARY_WINDOW = 20


@dataclass
class CosineRow:
    client_id: int
    is_malicious: bool
    value: float


@dataclass
class RoundLog:
    round: int
    accuracy: float
    asr: float
    selected: tuple  # client ids, ascending
    attack_active: bool
    poisoned_samples: int
    cosines: list = field(default_factory=list)  # CosineRow per selected client
    wall_time_s: float = 0.0  # informational; excluded from deterministic outputs


def accuracy(p: nn.ModelParams, test: Dataset) -> float:
    """Fraction of test samples whose argmax matches the label."""
    if len(test) == 0:
        raise ValueError("cannot evaluate on an empty set")
    preds = nn.predict(p, test.features)
    return float(np.mean(preds == test.labels))


def attack_success_rate(p: nn.ModelParams, test: Dataset, pattern: TriggerPattern,
                        eval_fraction: float = 0.5, seed: int = 0,
                        with_counts: bool = False):
    """Fraction of triggered test samples the model sends to the target class.

    A seed-chosen eval_fraction subset of the test set is used; samples
    already labeled with the target class are excluded (they prove
    nothing), then the full trigger is applied to the rest. An empty
    denominator yields 0.0 with a warning.
    """
    if not 0.0 < eval_fraction <= 1.0:
        raise ValueError(f"eval_fraction must be in (0, 1], got {eval_fraction}")
    if len(test) == 0:
        raise ValueError("cannot evaluate on an empty set")
    n_eval = max(1, int(round(eval_fraction * len(test))))
    idx = substream(seed).choice(len(test), size=n_eval, replace=False)
    keep = idx[test.labels[idx] != pattern.target_class]
    if len(keep) == 0:
        logger.warning("no non-target samples in the evaluation subset; ASR defined as 0.0")
        return (0.0, 0, 0) if with_counts else 0.0
    X = apply_trigger_to_matrix(test.features[keep], pattern)
    preds = nn.predict(p, X)
    hits = int(np.sum(preds == pattern.target_class))
    rate = hits / len(keep)
    return (rate, hits, len(keep)) if with_counts else rate


def linreg(points) -> tuple:
    """Least-squares (slope, intercept, pearson_r) for (x, y) pairs.

    Constant x is degenerate and raises; constant y gives slope 0 and r 0.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError(f"need >= 2 (x, y) points, got shape {pts.shape}")
    x, y = pts[:, 0], pts[:, 1]
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx == 0.0:
        raise ValueError("x values are all equal; regression is degenerate")
    syy = float(np.sum((y - y.mean()) ** 2))
    sxy = float(np.sum((x - x.mean()) * (y - y.mean())))
    slope = sxy / sxx
    intercept = float(y.mean() - slope * x.mean())
    r = 0.0 if syy == 0.0 else sxy / np.sqrt(sxx * syy)
    return slope, intercept, float(r)


def summarize_rounds(logs) -> dict:
    """Trailing-window summary of a federation run.

    ASR averages the last SUMMARY_WINDOW rounds in which the attack was
    active (an attack confined to an early window is judged right after
    it, not after it has faded); accuracy averages the last
    SUMMARY_WINDOW rounds outright. Runs with no attack fall back to the
    trailing rounds for both.
    """
    if not logs:
        raise ValueError("no rounds to summarize")
    attack_rounds = [l for l in logs if l.attack_active]
    basis = attack_rounds if attack_rounds else logs
    tail = basis[-SUMMARY_WINDOW:]
    acc_tail = logs[-SUMMARY_WINDOW:]
    return {
        "summary_asr": float(np.mean([l.asr for l in tail])),
        "summary_accuracy": float(np.mean([l.accuracy for l in acc_tail])),
        "final_accuracy": logs[-1].accuracy,
        "asr_window_rounds": len(tail),
        "short_window": len(tail) < SUMMARY_WINDOW,
    }
