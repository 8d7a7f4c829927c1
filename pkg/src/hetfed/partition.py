"""Client data partitioning and class-distribution tools.

Partitioners split a dataset's sample indices across clients; all of them
are exhaustive (every sample assigned exactly once), leave no client
empty, and are deterministic in their seed. The class-cap partitioner is
the one with a closed-form heterogeneity index; the Gaussian and
Dirichlet partitioners give two more knobs over skew.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .datagen import Dataset
from .errors import CapacityError, InfeasibleError
from .rng import substream

SMOOTH_EPS = 1e-6
METRICS = ("chisq", "kl", "js", "wasserstein1", "bhattacharyya")


@dataclass
class Partition:
    """Per-client index arrays into the source dataset."""

    assignments: list  # list of int64 ndarrays, one per client
    heterogeneity: float | None = None  # set by the class-cap method only
    labels: np.ndarray | None = field(default=None, repr=False)  # source labels, for histograms

    @property
    def num_clients(self) -> int:
        return len(self.assignments)

    def client_histogram(self, client: int, num_classes: int) -> np.ndarray:
        if self.labels is None:
            raise ValueError("partition carries no label array")
        return class_histogram(self.labels[self.assignments[client]], num_classes)


def heterogeneity_index(max_classes_per_client: int, total_classes: int) -> float:
    """1 at one class per client, 0 when clients may hold every class."""
    if total_classes < 2:
        raise ValueError(f"total_classes must be >= 2, got {total_classes}")
    if not 1 <= max_classes_per_client <= total_classes:
        raise ValueError(
            f"max_classes_per_client must be in [1, {total_classes}], got {max_classes_per_client}"
        )
    return 1.0 - (max_classes_per_client - 1) / (total_classes - 1)


def max_classes_for_index(hi: float, total_classes: int) -> int:
    """Inverse of heterogeneity_index, rounded to the nearest feasible cap."""
    if not 0.0 <= hi <= 1.0:
        raise ValueError(f"heterogeneity index must be in [0, 1], got {hi}")
    c = int(round((1.0 - hi) * (total_classes - 1) + 1))
    return min(max(c, 1), total_classes)


def class_histogram(labels: np.ndarray, num_classes: int) -> np.ndarray:
    """Normalized class-frequency vector."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("cannot build a histogram from zero samples")
    counts = np.bincount(labels, minlength=num_classes).astype(np.float64)
    if len(counts) > num_classes:
        raise ValueError("labels exceed num_classes")
    return counts / counts.sum()


def histogram_csv_row(h: np.ndarray) -> str:
    """One CSV line of comma-separated class frequencies."""
    return ",".join(repr(float(v)) for v in h)


def _check_pair(observed, expected):
    o = np.asarray(observed, dtype=np.float64)
    e = np.asarray(expected, dtype=np.float64)
    if o.shape != e.shape or o.ndim != 1:
        raise ValueError(f"histograms must be 1-D and same length, got {o.shape} vs {e.shape}")
    if (o < 0).any() or (e < 0).any():
        raise ValueError("histograms must be non-negative")
    return o, e


def _smooth(h: np.ndarray) -> np.ndarray:
    """Replace zero bins with a small epsilon and renormalize."""
    if (h > 0).all():
        return h
    out = np.where(h <= 0, SMOOTH_EPS, h)
    return out / out.sum()


def distance(observed, expected, metric: str = "chisq") -> float:
    """Distance between two class histograms under the named metric.

    chisq and kl smooth zero bins of the reference before dividing; js,
    wasserstein1 (classes as points on a line) and bhattacharyya need no
    smoothing. All metrics are >= 0 and are 0 iff the inputs match after
    smoothing.
    """
    o, e = _check_pair(observed, expected)
    if metric == "chisq":
        e = _smooth(e)
        return float(np.sum((o - e) ** 2 / e))
    if metric == "kl":
        e = _smooth(e)
        mask = o > 0
        return float(np.sum(o[mask] * np.log(o[mask] / e[mask])))
    if metric == "js":
        m = 0.5 * (o + e)
        t = 0.0
        for h in (o, e):
            mask = h > 0
            t += 0.5 * float(np.sum(h[mask] * np.log(h[mask] / m[mask])))
        return t
    if metric == "wasserstein1":
        return float(np.abs(np.cumsum(o - e)[:-1]).sum())
    if metric == "bhattacharyya":
        bc = float(np.sum(np.sqrt(o * e)))
        return 0.0 if bc >= 1.0 else float(-np.log(max(bc, 1e-300)))
    raise ValueError(f"unknown metric {metric!r}, expected one of {METRICS}")


def _climb_to_distance(cur: np.ndarray, e: np.ndarray, target: float, tol: float,
                       rng, iters: int) -> tuple:
    """Seeded hill climb: random mass-quantum moves that shrink |chisq - target|.

    Mutates and returns `cur` plus its final error. The quantum starts at 1%
    of total mass and halves whenever progress stalls, so late iterations can
    land inside tight tolerances.
    """
    C = len(e)
    # aim a hair inside the public tolerance so the final renormalization
    # (an O(1e-15) mass shift) cannot push a borderline landing back out
    tol_inner = tol * (1.0 - 1e-9)
    cur_err = abs(distance(cur, e, "chisq") - target)
    quantum = 0.01
    stall = 0
    for _ in range(iters):
        if cur_err <= tol_inner:
            break
        i = int(rng.integers(C))
        j = int(rng.integers(C - 1))
        if j >= i:
            j += 1
        if cur[i] < quantum:
            stall += 1
        else:
            cur[i] -= quantum
            cur[j] += quantum
            err = abs(distance(cur, e, "chisq") - target)
            if err < cur_err:
                cur_err = err
                stall = 0
            else:
                cur[i] += quantum
                cur[j] -= quantum
                stall += 1
        if stall >= 200:
            quantum = max(quantum / 2.0, 1e-7)
            stall = 0
    return cur, cur_err


def histogram_at_distance(expected, target: float, tol: float = 0.02,
                          seed: int = 0, max_iters: int = 10_000) -> np.ndarray:
    """Histogram whose chisq distance from `expected` is within tol of target.

    The search starts from an analytically placed point: chisq distance is
    exactly quadratic along the mixture (1-lam)*expected + lam*onehot(k), so
    lam = sqrt(target / chisq(onehot(k), expected)) lands on the target for
    any reachable value (the concentration class k is a seeded choice among
    classes whose one-hot distance covers the target, so different seeds
    yield differently shaped histograms). A seeded hill climb then refines:
    repeatedly move a small mass quantum between two random bins, keeping
    moves that bring the measured distance closer to the target. Starting
    from the concentrated mixture rather than a random walk is deliberate:
    it makes the output's largest class mass grow steadily with the target,
    mirroring how skewed data distributions concentrate in practice, and it
    reaches targets near the ceiling that random moves approach too slowly.
    Raises InfeasibleError when the target exceeds the reachable range (no
    single-class concentration reaches it) or the refinement budget runs out.
    """
    e = np.asarray(expected, dtype=np.float64)
    if e.ndim != 1 or len(e) < 2:
        raise ValueError("expected histogram must be 1-D with >= 2 bins")
    if (e < 0).any():
        raise ValueError("expected histogram must be non-negative")
    if target < 0:
        raise ValueError(f"target distance must be >= 0, got {target}")
    if tol <= 0:
        raise ValueError(f"tolerance must be > 0, got {tol}")
    e = e / e.sum()
    if target <= tol:
        return e.copy()
    rng = substream(seed)
    C = len(e)
    onehot_dist = np.empty(C)
    for k in range(C):
        onehot = np.zeros(C)
        onehot[k] = 1.0
        onehot_dist[k] = distance(onehot, e, "chisq")
    reachable = np.flatnonzero(onehot_dist >= target - tol)
    if len(reachable) == 0:
        raise InfeasibleError(
            f"chisq target {target} exceeds the reachable maximum "
            f"{onehot_dist.max():.4f} for this reference histogram"
        )
    k = int(reachable[rng.integers(len(reachable))])
    lam = min(1.0, math.sqrt(target / onehot_dist[k]))
    cur = (1.0 - lam) * e
    cur[k] += lam
    cur, cur_err = _climb_to_distance(cur, e, target, tol, rng, max_iters)
    if cur_err <= tol:
        out = np.maximum(cur, 0.0)
        out /= out.sum()
        if abs(distance(out, e, "chisq") - target) <= tol:
            return out
    raise InfeasibleError(
        f"no histogram within {tol} of chisq target {target} after {max_iters} iterations "
        f"(best miss {cur_err:.4f})"
    )


# ---------------- partitioners ---------------- #


def _validate_common(ds: Dataset, num_clients: int):
    if num_clients < 1:
        raise ValueError(f"num_clients must be >= 1, got {num_clients}")
    if len(ds) < num_clients:
        raise CapacityError(f"{len(ds)} samples cannot cover {num_clients} clients")


def _class_pools(ds: Dataset, rng) -> list:
    """Seed-shuffled index pool per class."""
    pools = []
    for k in range(ds.num_classes):
        idx = np.flatnonzero(ds.labels == k)
        pools.append(idx[rng.permutation(len(idx))])
    return pools


def partition_class_cap(ds: Dataset, num_clients: int, max_classes: int, seed: int) -> Partition:
    """Cap the number of distinct classes any client may hold.

    Classes are dealt to client slots round-robin from a seed-shuffled
    class list, which keeps every class held by someone; each class's
    samples are then split evenly among its holders. Requires
    num_clients * max_classes >= num_classes or some class would have no
    holder.
    """
    _validate_common(ds, num_clients)
    C = ds.num_classes
    if not 1 <= max_classes <= C:
        raise ValueError(f"max_classes must be in [1, {C}], got {max_classes}")
    if num_clients * max_classes < C:
        raise CapacityError(
            f"{num_clients} clients with cap {max_classes} cannot hold all {C} classes"
        )
    rng = substream(seed, 0)
    shuffled = rng.permutation(C)
    held: list = [[] for _ in range(num_clients)]
    cursor = 0
    for s in range(num_clients * max_classes):
        client = s % num_clients
        # next class in the cycle this client does not hold yet; the probe
        # keeps the cursor from aliasing when C divides num_clients
        for probe in range(C):
            k = int(shuffled[(cursor + probe) % C])
            if k not in held[client]:
                held[client].append(k)
                cursor += probe + 1
                break
    holders: list = [[] for _ in range(C)]
    for j in range(num_clients):
        for k in held[j]:
            holders[k].append(j)
    pools = _class_pools(ds, rng)
    parts: list = [[] for _ in range(num_clients)]
    for k in range(C):
        chunks = np.array_split(pools[k], len(holders[k]))
        for j, chunk in zip(holders[k], chunks):
            parts[j].append(chunk)
    assignments = [
        np.sort(np.concatenate(p)) if p else np.empty(0, dtype=np.int64) for p in parts
    ]
    # repair pass: a client whose every chunk came up empty steals one sample
    # from the best-stocked co-holder of one of its classes
    for j in range(num_clients):
        if len(assignments[j]):
            continue
        moved = False
        for k in held[j]:
            donors = [h for h in holders[k] if h != j and len(assignments[h]) > 1]
            if not donors:
                continue
            donor = max(donors, key=lambda h: (len(assignments[h]), -h))
            take = [i for i in assignments[donor] if ds.labels[i] == k]
            if not take:
                continue
            assignments[j] = np.array([take[0]], dtype=np.int64)
            assignments[donor] = assignments[donor][assignments[donor] != take[0]]
            moved = True
            break
        if not moved:
            raise CapacityError(f"cannot give client {j} any sample under cap {max_classes}")
    return Partition(
        assignments,
        heterogeneity=heterogeneity_index(max_classes, C),
        labels=ds.labels,
    )


def partition_gaussian(ds: Dataset, num_clients: int, variance: float, seed: int) -> Partition:
    """Each client draws class indices from its own truncated Gaussian.

    Client j's Gaussian is centred at j * C / m, so the means tile the
    class range; draws outside [0, C) are redrawn (truncation). Lower
    variance concentrates each client on fewer classes; in the large
    variance limit the per-client histograms approach uniform. Clients
    take turns drawing one sample at a time so pool depletion is shared;
    when the drawn class's pool is empty the nearest class with samples
    left is used.
    """
    _validate_common(ds, num_clients)
    if variance <= 0:
        raise ValueError(f"variance must be > 0, got {variance}")
    C = ds.num_classes
    n = len(ds)
    rng = substream(seed, 1)
    pools = _class_pools(ds, rng)
    remaining = np.array([len(p) for p in pools])
    cursors = np.zeros(C, dtype=np.int64)
    std = math.sqrt(variance)
    quotas = np.full(num_clients, n // num_clients)
    quotas[: n % num_clients] += 1
    parts: list = [[] for _ in range(num_clients)]
    active = [(j, float(j * C / num_clients)) for j in range(num_clients)]
    filled = np.zeros(num_clients, dtype=np.int64)
    while active:
        nxt = []
        for j, mu in active:
            k = -1
            for _ in range(1000):
                cand = int(np.rint(rng.normal(mu, std)))
                if 0 <= cand < C:
                    k = cand
                    break
            if k < 0:
                k = int(rng.integers(C))
            if remaining[k] == 0:
                # nearest class that still has samples, smaller index on ties
                order = sorted(range(C), key=lambda c: (abs(c - k), c))
                k = next(c for c in order if remaining[c] > 0)
            parts[j].append(int(pools[k][cursors[k]]))
            cursors[k] += 1
            remaining[k] -= 1
            filled[j] += 1
            if filled[j] < quotas[j]:
                nxt.append((j, mu))
        active = nxt
    assignments = [np.sort(np.array(p, dtype=np.int64)) for p in parts]
    return Partition(assignments, labels=ds.labels)


def partition_dirichlet(ds: Dataset, num_clients: int, alpha: float, seed: int) -> Partition:
    """Split each class across clients by Dirichlet(alpha) proportions."""
    _validate_common(ds, num_clients)
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    C = ds.num_classes
    rng = substream(seed, 2)
    pools = _class_pools(ds, rng)
    for _ in range(20):
        parts: list = [[] for _ in range(num_clients)]
        for k in range(C):
            props = rng.dirichlet(np.full(num_clients, alpha))
            bounds = (np.cumsum(props) * len(pools[k])).astype(np.int64)
            bounds[-1] = len(pools[k])  # cumsum can undershoot by an ulp
            prev = 0
            for j, b in enumerate(bounds):
                if b > prev:
                    parts[j].append(pools[k][prev:b])
                prev = b
        if all(parts[j] for j in range(num_clients)):
            assignments = [np.sort(np.concatenate(p)) for p in parts]
            return Partition(assignments, labels=ds.labels)
    raise CapacityError(
        f"dirichlet(alpha={alpha}) kept leaving a client empty across 20 draws; "
        f"use more samples or larger alpha"
    )
