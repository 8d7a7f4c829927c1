"""Experiment configuration: dataclasses, strict JSON parsing, sweeps.

Unknown keys anywhere in a config are rejected with the offending dotted
path, so a typo never silently falls back to a default.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

from .datagen import TriggerPattern
from .errors import ConfigError

DEFAULT_TRIGGER_ENTRIES = 4
# Pinned inside the synthetic feature range on purpose: a pin far outside the
# data manifold is learnable from any single class and saturates the attack,
# while an in-range pin keeps attack success sensitive to the malicious data
# distribution.
DEFAULT_TRIGGER_VALUE = 0.5
WINDOWS = ("all", "former", "middle", "latter")


@dataclass
class DatasetSpec:
    kind: str = "synthetic"
    num_classes: int = 10
    num_features: int = 20
    samples_per_class: int = 200
    sigma: float = 1.0
    test_fraction: float = 0.25
    images: str | None = None  # idx kind only
    labels: str | None = None


@dataclass
class PartitionSpec:
    method: str = "class_cap"
    hi: float | None = None  # class_cap: heterogeneity index, resolved to a cap
    max_classes: int | None = None  # class_cap: explicit cap, overrides hi
    variance: float | None = None  # gaussian
    alpha: float | None = None  # dirichlet


@dataclass
class FederationSpec:
    total_clients: int = 20
    clients_per_round: int = 5
    total_rounds: int = 80
    local_epochs: int = 1
    batch_size: int = 16
    learning_rate: float = 0.05
    scaling_factor: float = 1.0
    hidden: tuple = (32,)


@dataclass
class AttackSpec:
    enabled: bool = False
    attack_scale: int = 10
    total_budget: int = 100
    timing: str = "evenly"
    timing_k: int = 5
    global_window: str = "all"
    # float: chisq distance of the malicious histogram from the global one;
    # "partition": match the median distance of the partition's own shards,
    # so the malicious data is exactly as skewed as everyone else's.
    chisq_target: float | str | None = None
    malicious_histogram: tuple | None = None
    # Seed for the malicious histogram draw. None derives it from the run
    # seed; pinning it lets a sweep vary the drawn shape (or hold it fixed)
    # independently of everything else in the run.
    histogram_seed: int | None = None
    # Resampled size of each malicious client's local dataset. None keeps
    # the client's original shard size. Pinning it (e.g. to a multiple of
    # the batch size) makes poison-plan feasibility independent of how the
    # partition happened to slice the data.
    malicious_data_size: int | None = None
    trigger: TriggerPattern | None = None
    split_trigger: bool = False


@dataclass
class ActiveDefenseSpec:
    enabled: bool = False
    iid_fraction: float = 0.1
    retrain_epochs: int = 1


@dataclass
class FakeDistributionSpec:
    enabled: bool = False
    chisq_offset: float = 0.0


@dataclass
class DefenseSpec:
    cosine_monitor: bool = True
    active: ActiveDefenseSpec = field(default_factory=ActiveDefenseSpec)
    separation_factor: int | None = None  # switches the scheduler when set
    fake_distribution: FakeDistributionSpec = field(default_factory=FakeDistributionSpec)


@dataclass
class ExperimentConfig:
    dataset: DatasetSpec
    partition: PartitionSpec
    federation: FederationSpec
    attack: AttackSpec
    defense: DefenseSpec
    master_seed: int = 1
    repeats: int = 1
    eval_fraction: float = 0.5
    output_dir: str = "results"

    def validate(self) -> None:
        d, p, f, a = self.dataset, self.partition, self.federation, self.attack
        if d.kind not in ("synthetic", "idx"):
            raise ConfigError(f"dataset.kind must be 'synthetic' or 'idx', got {d.kind!r}")
        if d.kind == "idx" and (not d.images or not d.labels):
            raise ConfigError("dataset.kind 'idx' needs dataset.images and dataset.labels")
        if not 0 < d.test_fraction < 1:
            raise ConfigError(f"dataset.test_fraction must be in (0, 1), got {d.test_fraction}")
        if p.method not in ("class_cap", "gaussian", "dirichlet"):
            raise ConfigError(f"unknown partition.method {p.method!r}")
        if p.method == "class_cap" and p.hi is None and p.max_classes is None:
            raise ConfigError("partition.method 'class_cap' needs partition.hi or partition.max_classes")
        if p.method == "gaussian" and p.variance is None:
            raise ConfigError("partition.method 'gaussian' needs partition.variance")
        if p.method == "dirichlet" and p.alpha is None:
            raise ConfigError("partition.method 'dirichlet' needs partition.alpha")
        if f.clients_per_round > f.total_clients:
            raise ConfigError(
                f"federation.clients_per_round {f.clients_per_round} exceeds "
                f"total_clients {f.total_clients}"
            )
        if f.total_rounds < 1:
            raise ConfigError("federation.total_rounds must be >= 1")
        if f.scaling_factor < 1.0:
            raise ConfigError(f"federation.scaling_factor must be >= 1, got {f.scaling_factor}")
        if a.enabled:
            if not 1 <= a.attack_scale <= f.total_clients:
                raise ConfigError(
                    f"attack.attack_scale must be in [1, {f.total_clients}], got {a.attack_scale}"
                )
            if a.total_budget < 0:
                raise ConfigError("attack.total_budget must be >= 0")
            if a.global_window not in WINDOWS:
                raise ConfigError(f"attack.global_window must be one of {WINDOWS}")
            if a.chisq_target is not None and a.malicious_histogram is not None:
                raise ConfigError("set attack.chisq_target or attack.malicious_histogram, not both")
            if isinstance(a.chisq_target, str) and a.chisq_target != "partition":
                raise ConfigError(
                    f"attack.chisq_target must be a number or 'partition', got {a.chisq_target!r}"
                )
            if isinstance(a.chisq_target, (int, float)) and a.chisq_target < 0:
                raise ConfigError(f"attack.chisq_target must be >= 0, got {a.chisq_target}")
            if a.histogram_seed is not None and a.histogram_seed < 0:
                raise ConfigError("attack.histogram_seed must be >= 0")
            if a.malicious_data_size is not None and a.malicious_data_size < 1:
                raise ConfigError("attack.malicious_data_size must be >= 1")
        if self.defense.separation_factor is not None and self.defense.separation_factor < 1:
            raise ConfigError("defense.separation_factor must be >= 1")
        ad = self.defense.active
        if ad.enabled and not 0 < ad.iid_fraction < 1:
            raise ConfigError("defense.active.iid_fraction must be in (0, 1)")
        if not 0 < self.eval_fraction <= 1:
            raise ConfigError(f"eval_fraction must be in (0, 1], got {self.eval_fraction}")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")

    def resolved_trigger(self) -> TriggerPattern:
        """Configured trigger, or the default: the last few features pinned."""
        if self.attack.trigger is not None:
            return self.attack.trigger
        d = self.dataset.num_features
        n = min(DEFAULT_TRIGGER_ENTRIES, d)
        return TriggerPattern(
            tuple((d - n + i, DEFAULT_TRIGGER_VALUE) for i in range(n)), 0
        )

    def arch(self) -> tuple:
        return (self.dataset.num_features, *self.federation.hidden, self.dataset.num_classes)

    def to_dict(self) -> dict:
        trig = self.attack.trigger
        return {
            "dataset": {
                "kind": self.dataset.kind,
                "num_classes": self.dataset.num_classes,
                "num_features": self.dataset.num_features,
                "samples_per_class": self.dataset.samples_per_class,
                "sigma": self.dataset.sigma,
                "test_fraction": self.dataset.test_fraction,
                "images": self.dataset.images,
                "labels": self.dataset.labels,
            },
            "partition": {
                "method": self.partition.method,
                "hi": self.partition.hi,
                "max_classes": self.partition.max_classes,
                "variance": self.partition.variance,
                "alpha": self.partition.alpha,
            },
            "federation": {
                "total_clients": self.federation.total_clients,
                "clients_per_round": self.federation.clients_per_round,
                "total_rounds": self.federation.total_rounds,
                "local_epochs": self.federation.local_epochs,
                "batch_size": self.federation.batch_size,
                "learning_rate": self.federation.learning_rate,
                "scaling_factor": self.federation.scaling_factor,
                "hidden": list(self.federation.hidden),
            },
            "attack": {
                "enabled": self.attack.enabled,
                "attack_scale": self.attack.attack_scale,
                "total_budget": self.attack.total_budget,
                "timing": self.attack.timing,
                "timing_k": self.attack.timing_k,
                "global_window": self.attack.global_window,
                "chisq_target": self.attack.chisq_target,
                "histogram_seed": self.attack.histogram_seed,
                "malicious_data_size": self.attack.malicious_data_size,
                "malicious_histogram": (
                    list(self.attack.malicious_histogram)
                    if self.attack.malicious_histogram is not None
                    else None
                ),
                "trigger": (
                    {"entries": [list(e) for e in trig.entries], "target_class": trig.target_class}
                    if trig is not None
                    else None
                ),
                "split_trigger": self.attack.split_trigger,
            },
            "defense": {
                "cosine_monitor": self.defense.cosine_monitor,
                "active": {
                    "enabled": self.defense.active.enabled,
                    "iid_fraction": self.defense.active.iid_fraction,
                    "retrain_epochs": self.defense.active.retrain_epochs,
                },
                "separation_factor": self.defense.separation_factor,
                "fake_distribution": {
                    "enabled": self.defense.fake_distribution.enabled,
                    "chisq_offset": self.defense.fake_distribution.chisq_offset,
                },
            },
            "master_seed": self.master_seed,
            "repeats": self.repeats,
            "eval_fraction": self.eval_fraction,
            "output_dir": self.output_dir,
        }


def _take(d: dict, path: str, fields: dict) -> dict:
    """Pop known keys with light type coercion; reject the rest by path."""
    if not isinstance(d, dict):
        raise ConfigError(f"config section {path or 'root'} must be a JSON object")
    out = {}
    d = dict(d)
    for name, conv in fields.items():
        if name in d:
            val = d.pop(name)
            out[name] = None if val is None else conv(val)
    if d:
        bad = ".".join(filter(None, [path, sorted(d)[0]]))
        raise ConfigError(f"unknown config key: {bad}")
    return out


def _require(d: dict, path: str, *names: str) -> None:
    for name in names:
        if name not in d:
            raise ConfigError(f"missing required config field: {path}.{name}" if path else
                              f"missing required config field: {name}")


def from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    raw = copy.deepcopy(raw)
    _require(raw, "", "dataset", "partition", "federation", "master_seed")

    ds = raw.pop("dataset")
    dataset = DatasetSpec(**_take(ds, "dataset", {
        "kind": str, "num_classes": int, "num_features": int, "samples_per_class": int,
        "sigma": float, "test_fraction": float, "images": str, "labels": str,
    }))

    pt = raw.pop("partition")
    _require(pt, "partition", "method")
    partition = PartitionSpec(**_take(pt, "partition", {
        "method": str, "hi": float, "max_classes": int, "variance": float, "alpha": float,
    }))

    fd = raw.pop("federation")
    federation = FederationSpec(**_take(fd, "federation", {
        "total_clients": int, "clients_per_round": int, "total_rounds": int,
        "local_epochs": int, "batch_size": int, "learning_rate": float,
        "scaling_factor": float, "hidden": lambda v: tuple(int(x) for x in v),
    }))

    atk_raw = raw.pop("attack", {})
    trig_raw = atk_raw.pop("trigger", None) if isinstance(atk_raw, dict) else None
    trigger = None
    if trig_raw is not None:
        t = _take(trig_raw, "attack.trigger", {
            "entries": lambda v: tuple((int(i), float(x)) for i, x in v),
            "target_class": int,
        })
        _require(t, "attack.trigger", "entries", "target_class")
        trigger = TriggerPattern(t["entries"], t["target_class"])
    attack = AttackSpec(trigger=trigger, **_take(atk_raw, "attack", {
        "enabled": bool, "attack_scale": int, "total_budget": int, "timing": str,
        "timing_k": int, "global_window": str,
        "chisq_target": lambda v: v if isinstance(v, str) else float(v),
        "histogram_seed": int, "malicious_data_size": int,
        "malicious_histogram": lambda v: tuple(float(x) for x in v),
        "split_trigger": bool,
    }))

    df_raw = raw.pop("defense", {})
    act_raw = df_raw.pop("active", {}) if isinstance(df_raw, dict) else {}
    fake_raw = df_raw.pop("fake_distribution", {}) if isinstance(df_raw, dict) else {}
    active = ActiveDefenseSpec(**_take(act_raw, "defense.active", {
        "enabled": bool, "iid_fraction": float, "retrain_epochs": int,
    }))
    fake = FakeDistributionSpec(**_take(fake_raw, "defense.fake_distribution", {
        "enabled": bool, "chisq_offset": float,
    }))
    defense = DefenseSpec(active=active, fake_distribution=fake, **_take(df_raw, "defense", {
        "cosine_monitor": bool, "separation_factor": int,
    }))

    top = _take(raw, "", {
        "master_seed": int, "repeats": int, "eval_fraction": float, "output_dir": str,
    })
    cfg = ExperimentConfig(
        dataset=dataset, partition=partition, federation=federation,
        attack=attack, defense=defense, **top,
    )
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path) as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path} is not valid JSON: {e}") from e
    return from_dict(raw)


def set_by_path(raw: dict, path: str, value) -> None:
    """Assign into a nested dict by dotted path.

    Intermediate objects must already exist; the leaf key may be new
    (schema validation still rejects names outside the schema).
    """
    parts = path.split(".")
    node = raw
    for p in parts[:-1]:
        if not isinstance(node, dict) or p not in node:
            raise ConfigError(f"config path {path!r} does not exist at {p!r}")
        node = node[p]
    if not isinstance(node, dict):
        raise ConfigError(f"config path {path!r} does not address an object")
    node[parts[-1]] = value
