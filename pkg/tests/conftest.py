"""Shared fixtures and config helpers for the test suite."""
import numpy as np
import pytest

from hetfed import config as cfg
from hetfed.datagen import Dataset, gen_synthetic


def base_config_dict(**overrides):
    """Reference desk-scale experiment as a raw config dict.

    Keyword overrides use double-underscore paths, e.g.
    ``federation__total_rounds=8`` or ``attack__chisq_target=2.0``.
    """
    d = {
        "dataset": {"kind": "synthetic", "num_classes": 10, "num_features": 20,
                    "samples_per_class": 200, "sigma": 0.8, "test_fraction": 0.1},
        "partition": {"method": "class_cap", "hi": 0.5},
        "federation": {"total_clients": 20, "clients_per_round": 5,
                       "total_rounds": 100, "local_epochs": 1, "batch_size": 16,
                       "learning_rate": 0.05, "scaling_factor": 1.0,
                       "hidden": [32]},
        "attack": {"enabled": True, "attack_scale": 10, "total_budget": 300,
                   "timing": "evenly", "global_window": "all",
                   "trigger": {"entries": [[16, 0.5], [17, 0.5], [18, 0.5], [19, 0.5]],
                               "target_class": 0},
                   "chisq_target": 0.0, "malicious_data_size": 80},
        "defense": {},
        "master_seed": 42,
        "eval_fraction": 0.5,
    }
    for path, value in overrides.items():
        node = d
        parts = path.split("__")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return d


def tiny_config_dict(**overrides):
    """A seconds-scale config for harness/CLI plumbing tests."""
    d = base_config_dict(
        dataset__samples_per_class=30,
        federation__total_clients=6,
        federation__clients_per_round=2,
        federation__total_rounds=8,
        attack__attack_scale=2,
        attack__total_budget=16,
        attack__malicious_data_size=24,
    )
    for path, value in overrides.items():
        node = d
        parts = path.split("__")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return d


@pytest.fixture(scope="session")
def toy_dataset() -> Dataset:
    """10-class, 20-feature cluster dataset, 40 samples per class."""
    return gen_synthetic(10, 20, 40, sigma=0.8, seed=7)


@pytest.fixture(scope="session")
def balanced_labels_dataset() -> Dataset:
    """Minimal 2-feature dataset where the label equals feature 1."""
    n_per = 50
    C = 4
    rng = np.random.default_rng(3)
    labels = np.repeat(np.arange(C), n_per)
    feats = np.column_stack([rng.normal(size=C * n_per), labels.astype(float)])
    return Dataset(feats, labels, C)


def make_exp(d: dict) -> cfg.ExperimentConfig:
    return cfg.from_dict(d)
