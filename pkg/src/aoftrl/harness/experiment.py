"""Experiment configs, the cell runner, and deterministic reports.

A config names one problem, one or more algorithms, a horizon and a list of
seeds. Every (algorithm, seed) pair is a cell; a failing cell is recorded in
its row and the run continues.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import oracle
from ..domains import Hyperrectangle, Simplex
from ..engine import AOEG, AOGD, BOUND_SLACK, CAOGD_L1, run_online
from ..erm import run_caos_reg_erm_epoch, run_caos_reg_erm_epoch_minibatch
from ..predictors import from_name
from ..rcd import Lipschitz, Uniform, run_cao_rcd
from ..regularizers import L1, SquaredL2
from .baselines import run_baseline
from .data import erm_problem_for
from .streams import (ErmHinge, ErmLasso, ErmLogistic, FixedLinear, QuadraticBox, RandomLinear,
                      SlowlyVaryingLinear, generate_stream)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SEED_ENV = "AOFTRL_SEED"
RANDOMIZED_SLACK = 1.05

PROBLEMS = {
    "fixed_linear": FixedLinear,
    "slowly_varying": SlowlyVaryingLinear,
    "random_linear": RandomLinear,
    "quadratic_box": QuadraticBox,
    "erm_logistic": ErmLogistic,
    "erm_hinge": ErmHinge,
    "erm_lasso": ErmLasso,
}
ERM_KINDS = (ErmLogistic, ErmHinge, ErmLasso)
ONLINE = ("aogd", "aoeg", "caogd_l1")
BASELINES = ("ogd", "adagrad", "eg")
RANDOMIZED = ("cao_rcd", "erm_epoch", "erm_minibatch")
ALGORITHMS = ONLINE + BASELINES + RANDOMIZED
SIMPLEX_ALGOS = ("aoeg", "eg")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def parse_seeds(spec) -> list[int]:
    """``"0-4,7"`` -> ``[0, 1, 2, 3, 4, 7]``; lists and ints pass through."""
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, (list, tuple)):
        return [int(s) for s in spec]
    seeds: list[int] = []
    for part in str(spec).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1) if not part.startswith("-") else (part, "")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ConfigError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    return seeds


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class AlgorithmSpec:
    kind: str
    params: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return self.params.get("label", self.kind)


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    problem_params: dict
    algorithms: tuple
    T: int
    seeds: tuple
    predictor: str = "last"
    domain: dict | None = None
    composite: dict | None = None
    output: str | None = None
    timing: bool = False

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {sorted(PROBLEMS)}")
        if not isinstance(self.T, int) or self.T < 0:
            raise ConfigError("T must be a non-negative integer")
        if len(self.seeds) == 0:
            raise ConfigError("the seed list is empty")
        if not self.algorithms:
            raise ConfigError("no algorithms given")
        for a in self.algorithms:
            if a.kind not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a.kind!r}; choose from {list(ALGORITHMS)}")
        try:
            self.stream_kind()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad parameters for {self.problem}: {exc}") from exc
        from_name(self.predictor, [1.0])
        _composite(self.composite)
        self.build_domain()

    def stream_kind(self):
        return PROBLEMS[self.problem](**self.problem_params)

    def build_domain(self):
        kind = self.stream_kind()
        spec = dict(self.domain or {})
        dtype = spec.get("type")
        if dtype is None:
            dtype = "simplex" if any(a.kind in SIMPLEX_ALGOS for a in self.algorithms) else "box"
        if isinstance(kind, ERM_KINDS):
            n = kind.n
        elif isinstance(kind, FixedLinear):
            n = len(kind.g)
        elif isinstance(kind, SlowlyVaryingLinear) and kind.base is not None:
            n = len(kind.base)
        else:
            n = int(spec.get("n", 10 if dtype == "simplex" else 5))
        if "n" in spec and int(spec["n"]) != n:
            raise ConfigError(f"domain n={spec['n']} conflicts with the problem's n={n}")
        if dtype == "simplex":
            return Simplex(n)
        if dtype != "box":
            raise ConfigError(f"unknown domain type {dtype!r}")
        radii = spec.get("radii")
        if radii is not None:
            if len(radii) != n:
                raise ConfigError("radii length differs from n")
            return Hyperrectangle(np.asarray(radii, dtype=float))
        return Hyperrectangle.cube(n, float(spec.get("radius", 1.0)))

    def echo(self) -> dict:
        return {
            "problem": {"kind": self.problem, **self.problem_params},
            "algorithms": [{"kind": a.kind, **a.params} for a in self.algorithms],
            "T": self.T,
            "seeds": list(self.seeds),
            "predictor": self.predictor,
            "domain": self.domain,
            "composite": self.composite,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        prob = d.pop("problem", None)
        if isinstance(prob, str):
            prob = {"kind": prob}
        if not isinstance(prob, dict) or "kind" not in prob:
            raise ConfigError("config needs problem.kind")
        prob = dict(prob)
        kind = prob.pop("kind")
        algos = d.pop("algorithms", None)
        if algos is None and "algorithm" in d:
            algos = [d.pop("algorithm")]
        if algos is None:
            raise ConfigError("config needs algorithms")
        specs = []
        for a in algos:
            if isinstance(a, str):
                a = {"kind": a}
            a = dict(a)
            specs.append(AlgorithmSpec(a.pop("kind"), a))
        seeds = parse_seeds(d.pop("seeds")) if "seeds" in d else [default_seed()]
        if "T" not in d:
            raise ConfigError("config needs T")
        T = d.pop("T")
        if isinstance(T, bool) or not isinstance(T, int):
            raise ConfigError("T must be an integer")
        known = {"predictor", "domain", "composite", "output", "timing"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(kind, prob, tuple(specs), T, tuple(seeds), **d)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        data = tomllib.loads(text)
    else:
        data = json.loads(text)
    return ExperimentConfig.from_dict(data)


def _composite(spec):
    if spec is None:
        return None
    kind = spec.get("kind", "l1").lower()
    alpha = float(spec.get("alpha", 0.0))
    if kind == "none":
        return None
    if kind == "l1":
        return L1(alpha)
    if kind in ("squared_l2", "l2"):
        return SquaredL2(alpha)
    raise ConfigError(f"unknown composite {kind!r}")


def solver_seed(seed: int) -> int:
    """Seed for a solver's own sampling, independent of the stream drawn from ``seed``."""
    return int(np.random.SeedSequence(seed).spawn(1)[0].generate_state(1)[0])


# ---------------------------------------------------------------- running

@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    aggregates: list
    reports: list = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {"config_echo": self.config.echo(), "rows": self.rows, "aggregates": self.aggregates}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)

    def all_bounds_hold(self) -> bool:
        return all(a["bounds_hold"] for a in self.aggregates) and not any(r["error"] for r in self.rows)


def run_cell(config: ExperimentConfig, algo: AlgorithmSpec, seed: int, cache: dict | None = None):
    cache = {} if cache is None else cache
    domain = config.build_domain()
    kind = config.stream_kind()
    T = config.T
    p = algo.params
    pred_name = p.get("predictor", config.predictor)
    if algo.kind in ("erm_epoch", "erm_minibatch"):
        if not isinstance(kind, ERM_KINDS):
            raise ConfigError(f"{algo.kind} needs an ERM problem")
        key = ("erm", kind, tuple(domain.radii))
        if key not in cache:
            problem = erm_problem_for(kind, domain)
            x_star = oracle.best_fixed_point([problem.F], domain, problem.psi, 1).x
            cache[key] = (problem, x_star)
        problem, x_star = cache[key]
        k = int(p.get("k", 1))
        if algo.kind == "erm_epoch":
            return run_caos_reg_erm_epoch(problem, k, T, solver_seed(seed), comparator=x_star)
        partition = p.get("partition")
        if partition is None:
            groups = int(p.get("groups", 1))
            partition = [list(range(problem.m))[g::groups] for g in range(groups)]
        return run_caos_reg_erm_epoch_minibatch(problem, partition, k, T, solver_seed(seed), comparator=x_star)
    stream = generate_stream(kind, seed, T, domain)
    predictor = from_name(pred_name, stream.lipschitz)
    if algo.kind in BASELINES:
        return run_baseline(algo.kind, stream, domain, T, eta=p.get("eta"))
    if algo.kind == "cao_rcd":
        sampler = p.get("sampler", "lipschitz")
        policy = Lipschitz(np.maximum(stream.lipschitz, 1e-12)) if sampler == "lipschitz" else Uniform()
        if pred_name == "last":
            predictor = from_name("half_lipschitz", stream.lipschitz)
        return run_cao_rcd(stream, domain, policy, predictor, _composite(p.get("composite", config.composite)),
                           T, solver_seed(seed))
    if algo.kind == "aoeg":
        return run_online(stream, domain, predictor, AOEG(float(p.get("C", 1.0))), T)
    if algo.kind == "caogd_l1":
        comp = _composite(p.get("composite", config.composite))
        alpha = float(p.get("alpha", comp.alpha if comp is not None else 0.0))
        return run_online(stream, domain, predictor, CAOGD_L1(alpha), T)
    return run_online(stream, domain, predictor, AOGD(), T)


def run_experiment(config: ExperimentConfig, keep_reports: bool = False) -> ExperimentResult:
    rows, reports = [], []
    cache: dict = {}
    for algo in config.algorithms:
        for seed in config.seeds:
            start = time.perf_counter()
            try:
                report = run_cell(config, algo, seed, cache)
            except Exception as exc:  # recorded per cell, the run goes on
                rows.append(_row(algo.label, seed, config.T, None, f"{type(exc).__name__}: {exc}"))
                reports.append(None)
                continue
            elapsed = (time.perf_counter() - start) * 1e3
            row = _row(algo.label, seed, config.T, report, None)
            if config.timing:
                row["runtime_ms"] = round(elapsed, 3)
            rows.append(row)
            reports.append(report if keep_reports else None)
    aggregates = [_aggregate(a, [r for r in rows if r["algorithm"] == a.label]) for a in config.algorithms]
    return ExperimentResult(config, rows, aggregates, reports)


def _row(label, seed, T, report, error):
    if report is None:
        return {"algorithm": label, "seed": seed, "T": T, "regret": None, "bounds": {}, "bound_ratios": {},
                "final_iterate": None, "runtime_ms": None, "error": error}
    bounds = {k: float(v) for k, v in sorted(report.bounds.items())}
    ratios = {k: (v / report.regret if report.regret > 0 else None) for k, v in bounds.items()}
    return {"algorithm": label, "seed": seed, "T": T, "regret": float(report.regret), "bounds": bounds,
            "bound_ratios": ratios, "final_iterate": [float(v) for v in report.final_iterate],
            "runtime_ms": None, "error": None}


def _aggregate(algo: AlgorithmSpec, rows: list) -> dict:
    ok = [r for r in rows if r["error"] is None]
    out = {"algorithm": algo.label, "cells": len(rows), "failed": len(rows) - len(ok), "mean_regret": None,
           "std_regret": None, "mean_bounds": {}, "bounds_hold": len(ok) == len(rows)}
    if not ok:
        out["bounds_hold"] = False
        return out
    regrets = np.array([r["regret"] for r in ok])
    out["mean_regret"] = float(regrets.mean())
    out["std_regret"] = float(regrets.std())
    names = sorted(set().union(*(r["bounds"] for r in ok)))
    holds = out["bounds_hold"]
    for name in names:
        vals = np.array([r["bounds"][name] for r in ok])
        out["mean_bounds"][name] = float(vals.mean())
        if algo.kind in RANDOMIZED:
            holds = holds and bool(regrets.mean() <= vals.mean() * RANDOMIZED_SLACK)
        else:
            holds = holds and bool(np.all(regrets <= vals + BOUND_SLACK))
    out["bounds_hold"] = holds
    return out


# ---------------------------------------------------------------- serialization

def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def rows_to_csv(rows: list) -> str:
    names = sorted(set().union(*(r["bounds"] for r in rows))) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algorithm", "seed", "T", "regret"] + [f"bound_{n}" for n in names]
               + ["final_iterate", "runtime_ms", "error"])
    for r in rows:
        fi = "" if r["final_iterate"] is None else ";".join(repr(v) for v in r["final_iterate"])
        w.writerow([r["algorithm"], r["seed"], r["T"], "" if r["regret"] is None else repr(r["regret"])]
                   + [repr(r["bounds"][n]) if n in r["bounds"] else "" for n in names]
                   + [fi, "" if r["runtime_ms"] is None else r["runtime_ms"], r["error"] or ""])
    return buf.getvalue()


def write_report(result: ExperimentResult, path) -> tuple[Path, Path]:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(result.to_json())
    csv_path = path.with_suffix(".csv")
    csv_path.write_text(result.to_csv())
    return path, csv_path


def regret_curves(config: ExperimentConfig) -> list[tuple[str, int, np.ndarray]]:
    out = []
    cache: dict = {}
    for algo in config.algorithms:
        for seed in config.seeds:
            report = run_cell(config, algo, seed, cache)
            out.append((algo.label, seed, report.regret_curve()))
    return out


def write_curves(config: ExperimentConfig, directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for label, seed, curve in regret_curves(config):
        p = directory / f"curve_{label}_seed{seed}.csv"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "regret"])
        for t, v in enumerate(curve, start=1):
            w.writerow([t, repr(float(v))])
        p.write_text(buf.getvalue())
        paths.append(p)
    return paths


# ---------------------------------------------------------------- verify-bounds suites

def suite_configs(suite: str, seeds) -> list[ExperimentConfig]:
    seeds = tuple(parse_seeds(seeds))
    lib = {
        "aogd": [
            {"problem": {"kind": "random_linear", "scale": 1.0}, "algorithms": ["aogd"], "T": 1000,
             "domain": {"type": "box", "n": 5}},
            {"problem": {"kind": "slowly_varying", "sigma": 0.01}, "algorithms": ["aogd"], "T": 1000,
             "domain": {"type": "box", "n": 5}},
        ],
        "aoeg": [
            {"problem": {"kind": "random_linear", "scale": 1.0, "nonnegative": True}, "algorithms": ["aoeg"],
             "T": 1000, "domain": {"type": "simplex", "n": 10}},
        ],
        "rcd": [
            {"problem": {"kind": "random_linear", "scale": 1.0}, "algorithms": [{"kind": "cao_rcd"}],
             "T": 500, "domain": {"type": "box", "n": 2}},
        ],
        "erm": [
            {"problem": {"kind": "erm_lasso", "m": 50, "n": 20, "alpha": 0.1}, "algorithms":
             [{"kind": "erm_epoch", "k": 10}], "T": 2000},
        ],
    }
    if suite == "all":
        names = ["aogd", "aoeg", "rcd", "erm"]
    elif suite in lib:
        names = [suite]
    else:
        raise ConfigError(f"unknown suite {suite!r}")
    return [ExperimentConfig.from_dict({**c, "seeds": list(seeds)}) for name in names for c in lib[name]]


def verify_bounds(suite: str, seeds) -> tuple[bool, dict]:
    results = [run_experiment(c) for c in suite_configs(suite, seeds)]
    doc = {"suite": suite, "seeds": list(parse_seeds(seeds)), "passed": all(r.all_bounds_hold() for r in results),
           "experiments": [r.to_dict() for r in results]}
    return doc["passed"], doc
