"""Experiment harness: repeats, CSV artifacts, manifests, parameter sweeps.

One experiment = one config run `repeats` times with derived seeds. A
sweep clones a template config across one or two axes of values and runs
each resulting experiment, then assembles a combined long-format CSV with
one schema shared by every figure:

    experiment_id, repeat, round, hi, chisq_target, attack_scale,
    total_budget, timing, accuracy, asr

All CSV output is a deterministic byte stream for a given (config, seed):
floats are written with repr (shortest round-trip form) and wall-clock
times stay out of CSVs entirely (the manifest carries total runtime).
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .config import ExperimentConfig, from_dict, set_by_path
from .datagen import split_train_test
from .defense import reserve_iid_set
from .fedcore import (
    _build_dataset,
    _build_partition,
    derive_malicious_histogram,
    run_federation,
)
from .kernels import BACKEND
from .metrics import SUMMARY_WINDOW, linreg, summarize_rounds
from .partition import class_histogram, histogram_csv_row
from .rng import IID, REPEAT, SPLIT, child_seed

ROUNDS_HEADER = "repeat,round,accuracy,asr,attack_active,poisoned_samples,selected\n"
COSINE_HEADER = "repeat,round,client_id,is_malicious,cosine\n"
SUMMARY_HEADER = "repeat,summary_asr,summary_accuracy,final_accuracy\n"
COMBINED_HEADER = (
    "experiment_id,repeat,round,hi,chisq_target,attack_scale,total_budget,timing,accuracy,asr\n"
)
SUMMARY_LONG_HEADER = (
    "experiment_id,repeat,hi,chisq_target,attack_scale,total_budget,timing,"
    "summary_accuracy,summary_asr\n"
)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _config_columns(exp: ExperimentConfig) -> dict:
    """The sweep-facing knobs of a config, blank when not applicable."""
    p = exp.partition
    if p.method == "class_cap":
        if p.max_classes is not None:
            hi = _fmt(
                1.0 - (p.max_classes - 1) / (exp.dataset.num_classes - 1)
            )
        else:
            hi = _fmt(float(p.hi))
    else:
        hi = ""
    atk = exp.attack
    return {
        "hi": hi,
        "chisq_target": (
            "" if not atk.enabled or atk.chisq_target is None
            else atk.chisq_target if isinstance(atk.chisq_target, str)
            else _fmt(float(atk.chisq_target))
        ),
        "attack_scale": str(atk.attack_scale) if atk.enabled else "",
        "total_budget": str(atk.total_budget) if atk.enabled else "",
        "timing": atk.timing if atk.enabled else "",
    }


def run_experiment(exp: ExperimentConfig, out_dir: str | None = None,
                   workers: int = 1, experiment_id: str = "exp") -> dict:
    """Run all repeats of one experiment and write its artifact directory.

    Returns a result dict with per-repeat logs and summaries. Files:
    rounds.csv, summary.csv, cosine.csv (when the monitor is on), and
    manifest.json echoing the resolved config.
    """
    exp.validate()
    out = Path(out_dir if out_dir is not None else exp.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    repeat_logs = []
    for rep in range(exp.repeats):
        seed = exp.master_seed if exp.repeats == 1 else child_seed(exp.master_seed, REPEAT, rep)
        repeat_logs.append(run_federation(exp, seed=seed, workers=workers))
    elapsed = time.perf_counter() - t0

    summaries = [summarize_rounds(logs) for logs in repeat_logs]
    with open(out / "rounds.csv", "w") as f:
        f.write(ROUNDS_HEADER)
        for rep, logs in enumerate(repeat_logs):
            for l in logs:
                f.write(
                    f"{rep},{l.round},{_fmt(l.accuracy)},{_fmt(l.asr)},"
                    f"{int(l.attack_active)},{l.poisoned_samples},"
                    f"{';'.join(str(c) for c in l.selected)}\n"
                )
    with open(out / "summary.csv", "w") as f:
        f.write(SUMMARY_HEADER)
        for rep, s in enumerate(summaries):
            f.write(
                f"{rep},{_fmt(s['summary_asr'])},{_fmt(s['summary_accuracy'])},"
                f"{_fmt(s['final_accuracy'])}\n"
            )
    if exp.defense.cosine_monitor:
        with open(out / "cosine.csv", "w") as f:
            f.write(COSINE_HEADER)
            for rep, logs in enumerate(repeat_logs):
                for l in logs:
                    for c in l.cosines:
                        f.write(
                            f"{rep},{l.round},{c.client_id},{int(c.is_malicious)},"
                            f"{_fmt(c.value)}\n"
                        )
    # class-mix artifacts for the first repeat's seed: the training pool's
    # histogram and, when the attack targets a distribution, the one it mimics
    seed0 = exp.master_seed if exp.repeats == 1 else child_seed(exp.master_seed, REPEAT, 0)
    full = _build_dataset(exp, seed0)
    train, _ = split_train_test(full, exp.dataset.test_fraction, child_seed(seed0, SPLIT))
    pool = train
    if exp.defense.active.enabled:
        _, pool = reserve_iid_set(train, exp.defense.active.iid_fraction, child_seed(seed0, IID))
    with open(out / "hist_global.csv", "w") as f:
        f.write(histogram_csv_row(class_histogram(pool.labels, pool.num_classes)) + "\n")
    shards = None
    if exp.attack.chisq_target == "partition":
        shards = _build_partition(exp, pool, seed0).assignments
    mal_hist = derive_malicious_histogram(exp, pool, seed0, shards=shards)
    if mal_hist is not None:
        with open(out / "hist_malicious.csv", "w") as f:
            f.write(histogram_csv_row(mal_hist) + "\n")

    manifest = {
        "experiment_id": experiment_id,
        "config": exp.to_dict(),
        "package_version": __version__,
        "kernel_backend": BACKEND,
        "runtime_seconds": elapsed,
        "notes": [],
    }
    if any(s["short_window"] for s in summaries):
        manifest["notes"].append(
            f"summary window shorter than {SUMMARY_WINDOW} rounds; all available rounds used"
        )
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return {
        "experiment_id": experiment_id,
        "out_dir": str(out),
        "logs": repeat_logs,
        "summaries": summaries,
        "columns": _config_columns(exp),
    }


def sweep(template_raw: dict, axis: str, values, out_dir: str,
          axis2: str | None = None, values2=None, workers: int = 1,
          run_workers: int = 1) -> dict:
    """Run the template once per axis value (or per value pair), then combine.

    Experiments run in config order, optionally across a process pool;
    the combined CSV is always assembled in that order afterwards, so
    output bytes do not depend on worker count. For a single numeric
    sweep over attack.chisq_target a scatter.csv with the fitted line is
    also written for downstream figures.
    """
    if (axis2 is None) != (values2 is None):
        raise ValueError("axis2 and values2 must be given together")
    grid = [(v, None) for v in values] if axis2 is None else [
        (v1, v2) for v1 in values for v2 in values2
    ]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    for i, (v1, v2) in enumerate(grid):
        raw = json.loads(json.dumps(template_raw))
        set_by_path(raw, axis, v1)
        if axis2 is not None:
            set_by_path(raw, axis2, v2)
        exp = from_dict(raw)
        eid = f"exp_{i:03d}"
        jobs.append((eid, exp, str(out / eid)))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_experiment, exp, d, run_workers, eid)
                for eid, exp, d in jobs
            ]
            results = [f.result() for f in futures]
    else:
        results = [run_experiment(exp, d, run_workers, eid) for eid, exp, d in jobs]

    with open(out / "combined.csv", "w") as f:
        f.write(COMBINED_HEADER)
        for res in results:
            c = res["columns"]
            for rep, logs in enumerate(res["logs"]):
                for l in logs:
                    f.write(
                        f"{res['experiment_id']},{rep},{l.round},{c['hi']},"
                        f"{c['chisq_target']},{c['attack_scale']},{c['total_budget']},"
                        f"{c['timing']},{_fmt(l.accuracy)},{_fmt(l.asr)}\n"
                    )
    with open(out / "summary_long.csv", "w") as f:
        f.write(SUMMARY_LONG_HEADER)
        for res in results:
            c = res["columns"]
            for rep, s in enumerate(res["summaries"]):
                f.write(
                    f"{res['experiment_id']},{rep},{c['hi']},{c['chisq_target']},"
                    f"{c['attack_scale']},{c['total_budget']},{c['timing']},"
                    f"{_fmt(s['summary_accuracy'])},{_fmt(s['summary_asr'])}\n"
                )

    fit = None
    if axis2 is None and axis == "attack.chisq_target":
        points = []
        for (v1, _), res in zip(grid, results):
            for s in res["summaries"]:
                points.append((float(v1), s["summary_asr"]))
        slope, intercept, r = linreg(points)
        fit = {"slope": slope, "intercept": intercept, "pearson_r": r}
        with open(out / "scatter.csv", "w") as f:
            f.write("chisq_target,summary_asr,slope,intercept,pearson_r\n")
            for x, y in points:
                f.write(
                    f"{_fmt(x)},{_fmt(y)},{_fmt(slope)},{_fmt(intercept)},{_fmt(r)}\n"
                )

    manifest = {
        "axis": axis,
        "values": list(values),
        "axis2": axis2,
        "values2": list(values2) if values2 is not None else None,
        "experiments": [eid for eid, _, _ in jobs],
        "linreg": fit,
    }
    with open(out / "sweep_manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return {"results": results, "manifest": manifest, "out_dir": str(out)}
