"""Seed-sweep experiments: config files, per-trial runs, resumable CSV sink, analysis."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import os
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import NoTransitionError, detect_transition
from .ddm import build_slice_plan, build_stage_plan, run_ddm
from .graph import (Graph, ParameterError, WeightedGraphSpec, calibrate_w_bar, generate_chung_lu,
                    generate_gnp, sample_observed_pair)
from .io import DataError, load_graph
from .pgm import SeedPolicy, classify_matches, run_pgm, select_seeds

WORKERS_ENV = "PERCMATCH_WORKERS"
ROW_FIELDS = ["a0", "trial", "good", "bad", "unmatched", "steps"]
ALGORITHMS = ("pgm", "ddm", "ddm_simplified")
SOURCES = ("chung_lu", "gnp", "file")


def default_grid(top: int = 4096) -> list[int]:
    return [2 ** k for k in range(int(math.log2(top)) + 1)]


@dataclass
class ExperimentConfig:
    source: str = "chung_lu"
    n: int = 10000
    beta: float = 2.5
    mean_degree: float = 10.0
    w_bar: float | None = None  # None: calibrated so the realized mean matches mean_degree
    path: str | None = None
    graph_seed: int = 0
    s: float = 0.7
    algorithm: str = "pgm"
    r: int = 4
    seed_mode: str = "uniform"
    window: tuple[float, float] | None = None
    grid: list[int] = field(default_factory=default_grid)
    trials: int = 1
    master_seed: int = 0
    gamma: float = 0.5
    epsilon_inner: float = 0.1
    C: float = 1.0
    slicing: str = "estimated_weight"
    theory: bool = False
    out: str = "sweep.csv"
    summary: str | None = None

    def __post_init__(self):
        self.grid = [int(a) for a in self.grid]
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ParameterError("grid must be strictly increasing")
        if any(a < 0 for a in self.grid):
            raise ParameterError("grid values must be non-negative")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"algorithm must be one of {ALGORITHMS}")
        if self.source not in SOURCES:
            raise ParameterError(f"source must be one of {SOURCES}")
        if self.source == "file" and not self.path:
            raise ParameterError("source=file needs a path")
        if not 0 <= self.s <= 1:
            raise ParameterError("s must lie in [0, 1]")
        if self.window is not None:
            self.window = (float(self.window[0]), float(self.window[1]))

    def fingerprint(self) -> str:
        """Hash of every field that affects row values."""
        d = dataclasses.asdict(self)
        for k in ("out", "summary", "grid", "trials"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _convert(key: str, value: str):
    kind = str(_FIELD_TYPES[key])
    if key == "grid":
        return [int(x) for x in value.replace(",", " ").split()]
    if key == "window":
        lo, hi = value.replace(",", " ").split()
        return float(lo), float(hi)
    if value.lower() in ("none", ""):
        return None
    if kind.startswith("bool"):
        if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ParameterError(f"{key}: expected a boolean, got {value!r}")
        return value.lower() in ("true", "1", "yes")
    if kind.startswith("int"):
        return int(value)
    if kind.startswith("float"):
        return float(value)
    return value


def parse_config_text(text: str, **overrides) -> ExperimentConfig:
    """``key = value`` lines; '#' starts a comment; unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ParameterError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _convert(key, value)
        except ValueError as exc:
            raise ParameterError(f"config line {lineno}: {exc}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path, **overrides) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text(), **overrides)


def trial_seeds(master: int, a0: int, trial: int) -> tuple[int, int, int]:
    """(sampling, seed selection, run) seeds from SeedSequence([master, a0, trial])."""
    s = np.random.SeedSequence([int(master), int(a0), int(trial)]).generate_state(3, np.uint32)
    return int(s[0]), int(s[1]), int(s[2])


def build_ground(cfg: ExperimentConfig) -> Graph:
    if cfg.source == "file":
        return load_graph(cfg.path)
    if cfg.source == "gnp":
        return generate_gnp(cfg.n, cfg.mean_degree, cfg.graph_seed)
    w_bar = cfg.w_bar if cfg.w_bar is not None else calibrate_w_bar(cfg.n, cfg.beta, cfg.mean_degree)
    return generate_chung_lu(WeightedGraphSpec(cfg.n, cfg.beta, w_bar, rng_seed=cfg.graph_seed))


class TrialRunner:
    """Everything fixed across trials: the groundtruth graph and the slice plan."""

    def __init__(self, cfg: ExperimentConfig, ground: Graph | None = None):
        self.cfg = cfg
        self.ground = ground if ground is not None else build_ground(cfg)
        self.plan = self.stages = None
        if cfg.algorithm != "pgm":
            mean_w = float(self.ground.weights.mean()) if self.ground.weights is not None \
                else float(self.ground.degrees().mean())
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                self.plan = build_slice_plan(self.ground.n, cfg.beta, mean_w, cfg.s, gamma=cfg.gamma,
                                             epsilon_inner=cfg.epsilon_inner, C=cfg.C,
                                             mode=cfg.slicing, theory=cfg.theory)
            self.stages = build_stage_plan(self.plan, simplified=cfg.algorithm == "ddm_simplified",
                                           r_low=cfg.r)

    def run(self, a0: int, trial: int, return_state: bool = False):
        cfg = self.cfg
        s_sample, s_seeds, s_run = trial_seeds(cfg.master_seed, a0, trial)
        pair = sample_observed_pair(self.ground, cfg.s, s_sample)
        seeds = select_seeds(pair, SeedPolicy(cfg.seed_mode, a0, cfg.window, s_seeds))
        if cfg.algorithm == "pgm":
            state = run_pgm(pair, seeds, cfg.r, rng_seed=s_run)
        else:
            state = run_ddm(pair, seeds, self.plan, self.stages, rng_seed=s_run).state
        good, bad, unmatched = classify_matches(state, pair.truth)
        row = {"a0": a0, "trial": trial, "good": good, "bad": bad, "unmatched": unmatched,
               "steps": state.processed_count}
        return (row, state, pair) if return_state else row


_RUNNER: TrialRunner | None = None


def _init_worker(cfg, ground):
    global _RUNNER
    _RUNNER = TrialRunner(cfg, ground)


def _work(key):
    return _RUNNER.run(*key)


def read_rows(path) -> list[dict]:
    """Parse a sweep CSV; malformed rows raise DataError with their line number."""
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        return []
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ROW_FIELDS:
            raise DataError(f"{path}:1: expected header {','.join(ROW_FIELDS)}")
        for rec in reader:
            lineno = reader.line_num
            if not rec:
                continue
            if len(rec) != len(ROW_FIELDS):
                raise DataError(f"{path}:{lineno}: expected {len(ROW_FIELDS)} fields, got {len(rec)}")
            try:
                row = {k: int(v) for k, v in zip(ROW_FIELDS, rec)}
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer field") from None
            if min(row.values()) < 0:
                raise DataError(f"{path}:{lineno}: negative field")
            rows.append(row)
    return rows


def _write_sorted(path, rows) -> None:
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.DictWriter(fh, ROW_FIELDS)
        w.writeheader()
        w.writerows(sorted(rows, key=lambda r: (r["a0"], r["trial"])))
    os.replace(tmp, path)


def _check_resume(cfg: ExperimentConfig, rows: list[dict]) -> set:
    done = set()
    grid = set(cfg.grid)
    for row in rows:
        key = (row["a0"], row["trial"])
        if key in done:
            raise DataError(f"duplicate result key {key} in {cfg.out}")
        if row["a0"] not in grid or row["trial"] >= cfg.trials:
            raise DataError(f"result key {key} in {cfg.out} is outside the configured sweep")
        done.add(key)
    return done


def run_sweep(cfg: ExperimentConfig, workers: int | None = None, ground: Graph | None = None,
              limit: int | None = None) -> list[dict]:
    """Run every (a0, trial) not already present in ``cfg.out``.

    Rows are appended and flushed as trials finish; on completion the file is
    rewritten sorted by (a0, trial) and the summary JSON is written. ``limit``
    stops after that many new trials (used to simulate interruption).
    """
    workers = workers or int(os.environ.get(WORKERS_ENV, "1"))
    out = Path(cfg.out)
    stamp = Path(str(out) + ".config")
    rows = read_rows(out)
    if rows:
        if not stamp.exists() or stamp.read_text().strip() != cfg.fingerprint():
            raise DataError(f"{out} was produced by a different configuration")
    done = _check_resume(cfg, rows)
    stamp.write_text(cfg.fingerprint() + "\n")
    todo = [(a0, t) for a0 in cfg.grid for t in range(cfg.trials) if (a0, t) not in done]
    if limit is not None:
        todo = todo[:limit]
    fresh = not out.exists() or out.stat().st_size == 0
    with open(out, "a", newline="") as fh:
        w = csv.DictWriter(fh, ROW_FIELDS)
        if fresh:
            w.writeheader()
            fh.flush()

        def sink(row):
            w.writerow(row)
            fh.flush()
            rows.append(row)

        if workers <= 1 or len(todo) <= 1:
            runner = TrialRunner(cfg, ground)
            for key in todo:
                sink(runner.run(*key))
        else:
            ground = ground if ground is not None else build_ground(cfg)
            with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(cfg, ground)) as ex:
                for row in ex.map(_work, todo, chunksize=1):
                    sink(row)
    if limit is not None and len(rows) < len(cfg.grid) * cfg.trials:
        return rows
    _write_sorted(out, rows)
    report = summarize(rows)
    if cfg.summary:
        with open(cfg.summary, "w") as fh:
            json.dump(report, fh, indent=2)
    return sorted(rows, key=lambda r: (r["a0"], r["trial"]))


def _transition(curve):
    try:
        return detect_transition(curve)
    except (NoTransitionError, ParameterError):
        return None


def summarize(rows: list[dict]) -> dict:
    """Per-a0 means, transitions of the mean curve and of each trial, bad fraction there."""
    by_a0: dict[int, list[dict]] = {}
    for row in rows:
        by_a0.setdefault(row["a0"], []).append(row)
    points = []
    for a0 in sorted(by_a0):
        rs = by_a0[a0]
        good = statistics.fmean(r["good"] for r in rs)
        bad = statistics.fmean(r["bad"] for r in rs)
        points.append({"a0": a0, "trials": len(rs), "mean_good": good, "mean_bad": bad,
                       "mean_matched": good + bad,
                       "bad_fraction": bad / (good + bad) if good + bad else 0.0})
    curve = [(p["a0"], p["mean_matched"]) for p in points]
    a_star = _transition(curve) if points else None
    per_trial = {}
    trials = sorted({r["trial"] for r in rows})
    for t in trials:
        c = sorted((r["a0"], r["good"] + r["bad"]) for r in rows if r["trial"] == t)
        per_trial[t] = _transition(c)
    found = [v for v in per_trial.values() if v is not None]
    bad_at = next((p["bad_fraction"] for p in points if p["a0"] == a_star), None)
    return {
        "rows": len(rows),
        "points": points,
        "transition": a_star,
        "bad_fraction_at_transition": bad_at,
        "trial_transitions": {str(k): v for k, v in per_trial.items()},
        "median_trial_transition": statistics.median(found) if found else None,
        "trials_without_transition": len(per_trial) - len(found),
    }


def analyze(results_path, json_out=None, csv_out=None) -> dict:
    report = summarize(read_rows(results_path))
    if json_out:
        with open(json_out, "w") as fh:
            json.dump(report, fh, indent=2)
    if csv_out:
        with open(csv_out, "w", newline="") as fh:
            w = csv.DictWriter(fh, ["a0", "trials", "mean_good", "mean_bad", "mean_matched", "bad_fraction"])
            w.writeheader()
            w.writerows(report["points"])
    return report
