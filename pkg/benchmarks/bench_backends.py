"""Wall-clock comparison of the numba and numpy training kernels.

Each backend is timed in its own subprocess because the backend is chosen
once at import from HETFED_BACKEND. Two workloads: raw mini-batch SGD
epochs on a desk-scale shard, and a full federation run. Numba timings
exclude JIT compilation (one warmup call per kernel before the clock
starts).

Usage: python3 benchmarks/bench_backends.py [--epochs N] [--rounds N]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def federation_config(rounds):
    return {
        "dataset": {"kind": "synthetic", "num_classes": 10, "num_features": 20,
                    "samples_per_class": 200, "sigma": 0.8, "test_fraction": 0.1},
        "partition": {"method": "class_cap", "hi": 0.5},
        "federation": {"total_clients": 20, "clients_per_round": 5,
                       "total_rounds": rounds, "local_epochs": 1,
                       "batch_size": 16, "learning_rate": 0.05,
                       "scaling_factor": 1.0, "hidden": [32]},
        "attack": {"enabled": True, "attack_scale": 10, "total_budget": 300,
                   "timing": "evenly", "global_window": "all",
                   "trigger": {"entries": [[16, 0.5], [17, 0.5], [18, 0.5], [19, 0.5]],
                               "target_class": 0},
                   "chisq_target": 0.0, "malicious_data_size": 80},
        "defense": {},
        "master_seed": 42, "eval_fraction": 0.5,
    }


def run_worker(epochs, rounds):
    from hetfed import config as cfg
    from hetfed import kernels
    from hetfed.fedcore import run_federation
    from hetfed.nn import init_mlp

    rng = np.random.default_rng(0)
    X = rng.normal(size=(900, 20))
    y = rng.integers(0, 10, size=900).astype(np.int64)
    p = init_mlp((20, 32, 10), seed=1)

    # warmup triggers JIT compilation on the numba backend
    kernels.loss_and_grad_flat(p.flat, p.dims, X[:16], y[:16])
    flat = p.flat.copy()
    kernels.run_sgd_epoch(flat, p.dims, X[:64], y[:64], 16, 0.05)
    kernels.forward_logits(flat, p.dims, X[:64])

    flat = p.flat.copy()
    t0 = time.perf_counter()
    for _ in range(epochs):
        kernels.run_sgd_epoch(flat, p.dims, X, y, 16, 0.05)
    t_epochs = time.perf_counter() - t0

    exp = cfg.from_dict(federation_config(rounds))
    t0 = time.perf_counter()
    run_federation(exp, workers=1)
    t_fed = time.perf_counter() - t0

    return {"backend": kernels.BACKEND,
            "sgd_epochs_per_s": epochs / t_epochs,
            "federation_s": t_fed}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epochs", type=int, default=200,
                    help="SGD epochs per backend for the kernel workload")
    ap.add_argument("--rounds", type=int, default=40,
                    help="federation rounds for the end-to-end workload")
    ap.add_argument("--worker", choices=("numba", "numpy"),
                    help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    if args.worker:
        out = run_worker(args.epochs, args.rounds)
        if out["backend"] != args.worker:
            raise RuntimeError(f"asked for {args.worker}, got {out['backend']}")
        print(json.dumps(out))
        return 0

    rows = []
    for backend in ("numpy", "numba"):
        env = dict(os.environ, HETFED_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker", backend,
             "--epochs", str(args.epochs), "--rounds", str(args.rounds)],
            env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            return 1
        rows.append(json.loads(proc.stdout.strip().splitlines()[-1]))

    base = rows[0]
    print(f"{'backend':<8} {'sgd epochs/s':>14} {'federation s':>14} "
          f"{'epoch speedup':>14} {'fed speedup':>12}")
    for r in rows:
        print(f"{r['backend']:<8} {r['sgd_epochs_per_s']:>14.1f} "
              f"{r['federation_s']:>14.2f} "
              f"{r['sgd_epochs_per_s'] / base['sgd_epochs_per_s']:>13.2f}x "
              f"{base['federation_s'] / r['federation_s']:>11.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
