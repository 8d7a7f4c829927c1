"""Federated averaging core: selection, local training, aggregation, the loop.

Every source of randomness is a named substream of the run seed, so a
round's work is a pure function of (global params, client data, config,
round index) and results are bitwise identical across executions and
across worker counts.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import nn, rng
from .attack import build_poison_plan, poison_batch, resample_client_data, split_trigger
from .config import ExperimentConfig
from .datagen import Dataset, gen_synthetic, load_idx, split_train_test
from .defense import active_defense, cosine_monitor, fake_distribution, reserve_iid_set
from .errors import ConfigError
from .metrics import CosineRow, RoundLog, accuracy, attack_success_rate
from .partition import (
    class_histogram,
    distance,
    histogram_at_distance,
    max_classes_for_index,
    partition_class_cap,
    partition_dirichlet,
    partition_gaussian,
)


@dataclass
class ClientState:
    id: int
    data: np.ndarray  # indices into the training pool
    is_malicious: bool = False
    last_selected_round: int | None = None


@dataclass
class ClientUpdate:
    client_id: int
    params: nn.ModelParams
    sample_count: int


@dataclass(frozen=True)
class Scheduler:
    kind: str = "uniform"  # or "separation"
    factor: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform", "separation"):
            raise ValueError(f"unknown scheduler kind {self.kind!r}")
        if self.kind == "separation" and self.factor < 1:
            raise ValueError("separation scheduler needs factor >= 1")


def select_clients(states, k: int, scheduler: Scheduler, round_idx: int, seed: int):
    """k distinct client ids for this round, ascending.

    Uniform: any client. Separation: only clients idle for at least
    `factor` rounds are eligible; when fewer than k qualify, the k least
    recently selected are taken instead (never-selected first, then by
    id), which degrades gracefully into round-robin.
    """
    if not 1 <= k <= len(states):
        raise ValueError(f"k must be in [1, {len(states)}], got {k}")
    if scheduler.kind == "separation":
        eligible = [
            s for s in states
            if s.last_selected_round is None
            or round_idx - s.last_selected_round >= scheduler.factor
        ]
        if len(eligible) < k:
            ranked = sorted(
                states,
                key=lambda s: (-1 if s.last_selected_round is None else s.last_selected_round, s.id),
            )
            return sorted(s.id for s in ranked[:k])
    else:
        eligible = list(states)
    gen = rng.substream(seed, rng.SELECT, round_idx)
    picked = gen.choice(len(eligible), size=k, replace=False)
    return sorted(eligible[i].id for i in picked)


def local_round(global_params: nn.ModelParams, client: ClientState, cfg: nn.TrainingConfig,
                dataset: Dataset, plan=None, round_idx: int = 0) -> ClientUpdate:
    """Train the global model on one client's shard; returns its update.

    Mini-batch order is reshuffled each local epoch from the client+round
    stream; when a poison plan is present each epoch's batch b has
    plan.per_batch_counts[b] of its samples replaced by triggered ones
    before the SGD step sees them.
    """
    if plan is not None and not client.is_malicious:
        raise ConfigError(f"client {client.id} is benign but received a poison plan")
    X = dataset.features[client.data]
    y = dataset.labels[client.data]
    n = len(client.data)
    if n == 0:
        raise ValueError(f"client {client.id} holds no samples")
    bs = cfg.batch_size
    num_batches = math.ceil(n / bs)
    if plan is not None and len(plan.per_batch_counts) != num_batches:
        raise ConfigError(
            f"plan covers {len(plan.per_batch_counts)} batches but client {client.id} "
            f"runs {num_batches}"
        )
    gen = rng.substream(cfg.seed, rng.LOCAL, client.id, round_idx)
    params = global_params.copy()
    for _ in range(cfg.local_epochs):
        perm = gen.permutation(n)
        Xe, ye = X[perm], y[perm]
        if plan is not None:
            for b in range(num_batches):
                cnt = plan.per_batch_counts[b]
                if cnt:
                    lo, hi = b * bs, min((b + 1) * bs, n)
                    Xe[lo:hi], ye[lo:hi] = poison_batch(Xe[lo:hi], ye[lo:hi], cnt, plan.pattern, gen)
        params = nn.sgd_epoch(params, Xe, ye, bs, cfg.learning_rate)
    return ClientUpdate(client.id, params, n)


def scale_update(update: ClientUpdate, global_params: nn.ModelParams,
                 factor: float) -> ClientUpdate:
    """Amplify the update's delta from the global model by `factor`."""
    if factor < 1.0:
        raise ValueError(f"scaling factor must be >= 1, got {factor}")
    if factor == 1.0:
        return ClientUpdate(update.client_id, update.params.copy(), update.sample_count)
    flat = global_params.flat + factor * (update.params.flat - global_params.flat)
    return ClientUpdate(update.client_id, nn.ModelParams(update.params.arch, flat), update.sample_count)


def aggregate(updates) -> nn.ModelParams:
    """Sample-count-weighted average of updates, reduced in ascending id order.

    Computed as base + sum(w_i * (p_i - base)) so identical inputs come
    back exactly and the reduction order is fixed regardless of how the
    updates arrived.
    """
    if not updates:
        raise ValueError("nothing to aggregate")
    ordered = sorted(updates, key=lambda u: u.client_id)
    arch = ordered[0].params.arch
    total = 0
    for u in ordered:
        if u.params.arch != arch:
            raise ValueError(f"update {u.client_id} has arch {u.params.arch}, expected {arch}")
        if u.sample_count < 1:
            raise ValueError(f"update {u.client_id} has sample_count {u.sample_count}")
        if not np.isfinite(u.params.flat).all():
            raise ValueError(f"update {u.client_id} contains non-finite parameters")
        total += u.sample_count
    base = ordered[0].params.flat
    acc = np.zeros_like(base)
    for u in ordered:
        acc += (u.sample_count / total) * (u.params.flat - base)
    return nn.ModelParams(arch, base + acc)


# ---------------- full federation loop ---------------- #


def _build_dataset(exp: ExperimentConfig, seed: int) -> Dataset:
    d = exp.dataset
    if d.kind == "synthetic":
        return gen_synthetic(
            d.num_classes, d.num_features, d.samples_per_class, d.sigma,
            rng.child_seed(seed, rng.DATA),
        )
    return load_idx(d.images, d.labels)


def _build_partition(exp: ExperimentConfig, pool: Dataset, seed: int):
    p = exp.partition
    pseed = rng.child_seed(seed, rng.PARTITION)
    if p.method == "class_cap":
        cap = p.max_classes if p.max_classes is not None else max_classes_for_index(
            p.hi, pool.num_classes
        )
        return partition_class_cap(pool, exp.federation.total_clients, cap, pseed)
    if p.method == "gaussian":
        return partition_gaussian(pool, exp.federation.total_clients, p.variance, pseed)
    return partition_dirichlet(pool, exp.federation.total_clients, p.alpha, pseed)


def derive_malicious_histogram(exp: ExperimentConfig, pool: Dataset, seed: int, shards=None):
    """Class mix malicious clients will mimic, or None when they keep their shards.

    An explicit histogram wins; otherwise a chisq_target is resolved
    against the training pool's histogram, or against the disclosed fake
    one when that defense is on. The "partition" sentinel targets the
    median chisq distance of the partition's own shards (`shards`, index
    arrays into the pool), so the malicious mix is exactly as skewed as a
    typical honest client's.
    """
    atk = exp.attack
    if not atk.enabled:
        return None
    if atk.malicious_histogram is not None:
        h = np.asarray(atk.malicious_histogram, dtype=np.float64)
        return h / h.sum()
    if atk.chisq_target is None:
        return None
    reference = class_histogram(pool.labels, pool.num_classes)
    target = atk.chisq_target
    if target == "partition":
        if shards is None:
            raise ValueError('chisq_target "partition" needs the partition shards')
        target = float(np.median([
            distance(class_histogram(pool.labels[idx], pool.num_classes), reference)
            for idx in shards if len(idx)
        ]))
    if exp.defense.fake_distribution.enabled:
        reference = fake_distribution(
            reference, exp.defense.fake_distribution.chisq_offset,
            rng.child_seed(seed, rng.FAKE),
        )
    hist_seed = (
        atk.histogram_seed if atk.histogram_seed is not None
        else rng.child_seed(seed, rng.HIST)
    )
    return histogram_at_distance(reference, target, seed=hist_seed)


def window_rounds(window: str, total_rounds: int) -> range:
    """Round range for a named third of the run."""
    if window == "all":
        return range(total_rounds)
    third = total_rounds // 3
    if window == "former":
        return range(0, third)
    if window == "middle":
        return range(third, 2 * third)
    if window == "latter":
        return range(2 * third, total_rounds)
    raise ValueError(f"unknown window {window!r}")


def run_federation(exp: ExperimentConfig, seed: int | None = None, workers: int = 1):
    """Run one federation experiment; returns the per-round logs.

    `seed` overrides the config's master seed (the harness passes one per
    repeat). `workers` sizes the thread pool for local rounds; results do
    not depend on it.
    """
    exp.validate()
    seed = exp.master_seed if seed is None else int(seed)
    fed = exp.federation
    full = _build_dataset(exp, seed)
    train, test = split_train_test(full, exp.dataset.test_fraction, rng.child_seed(seed, rng.SPLIT))
    iid_set = None
    pool = train
    if exp.defense.active.enabled:
        iid_set, pool = reserve_iid_set(
            train, exp.defense.active.iid_fraction, rng.child_seed(seed, rng.IID)
        )
    part = _build_partition(exp, pool, seed)
    states = [
        ClientState(j, part.assignments[j]) for j in range(fed.total_clients)
    ]

    arch = (full.num_features, *fed.hidden, full.num_classes)
    pattern = exp.resolved_trigger()
    plans = {}
    atk = exp.attack
    if atk.enabled:
        gen = rng.substream(seed, rng.MALICIOUS)
        malicious = sorted(int(i) for i in gen.choice(fed.total_clients, size=atk.attack_scale, replace=False))
        for j in malicious:
            states[j].is_malicious = True
        target_hist = derive_malicious_histogram(
            exp, pool, seed, shards=[s.data for s in states]
        )
        if target_hist is not None or atk.malicious_data_size is not None:
            for j in malicious:
                st = states[j]
                hist_j = (
                    target_hist if target_hist is not None
                    else class_histogram(pool.labels[st.data], pool.num_classes)
                )
                size_j = (
                    atk.malicious_data_size if atk.malicious_data_size is not None
                    else len(st.data)
                )
                st.data = resample_client_data(
                    pool, hist_j, size_j, rng.child_seed(seed, rng.RESAMPLE, j)
                )
        patterns = (
            split_trigger(pattern, min(atk.attack_scale, len(pattern.entries)))
            if atk.split_trigger
            else [pattern]
        )
        budgets = _spread_budget(atk.total_budget, len(malicious))
        for i, j in enumerate(malicious):
            n_j = len(states[j].data)
            B = math.ceil(n_j / fed.batch_size)
            last_sz = n_j - (B - 1) * fed.batch_size
            plans[j] = build_poison_plan(
                atk.timing, budgets[i], B, fed.batch_size,
                patterns[i % len(patterns)], k=min(atk.timing_k, B), last_batch_size=last_sz,
            )
    window = window_rounds(atk.global_window, fed.total_rounds) if atk.enabled else range(0)

    train_cfg = nn.TrainingConfig(fed.learning_rate, fed.batch_size, fed.local_epochs, seed)
    scheduler = (
        Scheduler("separation", exp.defense.separation_factor)
        if exp.defense.separation_factor is not None
        else Scheduler()
    )
    params = nn.init_mlp(arch, rng.child_seed(seed, rng.INIT))
    eval_seed = rng.child_seed(seed, rng.EVAL)
    logs = []
    pool_exec = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for r in range(fed.total_rounds):
            t0 = time.perf_counter()
            selected = select_clients(states, fed.clients_per_round, scheduler, r, seed)
            active = atk.enabled and r in window

            def one(j, _r=r, _active=active, _params=params):
                st = states[j]
                plan = plans.get(j) if _active else None
                try:
                    return local_round(_params, st, train_cfg, pool, plan, _r)
                except Exception as e:
                    raise RuntimeError(f"round {_r}, client {j}: {e}") from e

            if pool_exec is not None:
                updates = list(pool_exec.map(one, selected))
            else:
                updates = [one(j) for j in selected]
            updates.sort(key=lambda u: u.client_id)
            poisoned = sum(
                plans[j].budget * fed.local_epochs
                for j in selected
                if active and j in plans
            )
            cosines = []
            if exp.defense.cosine_monitor:
                cosines = [
                    CosineRow(u.client_id, states[u.client_id].is_malicious,
                              cosine_monitor(u, params))
                    for u in updates
                ]
            if exp.defense.active.enabled and exp.defense.active.retrain_epochs > 0:
                updates = active_defense(
                    updates, iid_set, exp.defense.active.retrain_epochs,
                    fed.learning_rate, fed.batch_size, rng.child_seed(seed, rng.DEFENSE, r),
                )
            if fed.scaling_factor != 1.0:
                updates = [
                    scale_update(u, params, fed.scaling_factor)
                    if states[u.client_id].is_malicious else u
                    for u in updates
                ]
            new_params = aggregate(updates)
            for j in selected:
                states[j].last_selected_round = r
            acc = accuracy(new_params, test)
            asr = attack_success_rate(new_params, test, pattern, exp.eval_fraction, eval_seed)
            logs.append(RoundLog(
                round=r, accuracy=acc, asr=asr, selected=tuple(selected),
                attack_active=active, poisoned_samples=poisoned, cosines=cosines,
                wall_time_s=time.perf_counter() - t0,
            ))
            params = new_params
    finally:
        if pool_exec is not None:
            pool_exec.shutdown()
    return logs


def _spread_budget(total: int, clients: int) -> list:
    base, rem = divmod(total, clients)
    return [base + (1 if i < rem else 0) for i in range(clients)]
