"""Replicated regret experiments, aggregation and CSV output."""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .environment import RegretTrace, generate_synthetic_instance
from .estimator import SolverOptions
from .glm import LinkFamily
from .policies import (
    GlmUcbParams,
    GLowTestrParams,
    run_g_lowtestr,
    run_glm_ucb_baseline,
    run_uniform_random,
)
from .tensor_algebra import TransformSpec

__all__ = [
    "ExperimentConfig",
    "PolicySpec",
    "RunRecord",
    "AggregateSummary",
    "ConfigError",
    "POLICY_RUNNERS",
    "run_experiment",
    "aggregate_traces",
    "emit_csv",
    "read_trace_csv",
    "read_aggregate_csv",
    "TRACE_HEADER",
    "AGGREGATE_HEADER",
]

TRACE_HEADER = ["policy", "seed", "round", "arm_index", "instant_regret", "cum_regret"]
AGGREGATE_HEADER = ["policy", "round", "mean_cum_regret", "std_cum_regret", "n_runs"]
DECISION_HEADER = ["policy", "seed", "round", "arm_index", "bonus", "predicted_mean"]


class ConfigError(ValueError):
    pass


def _make_g_lowtestr_params(d):
    d = dict(d)
    if isinstance(d.get("solver"), dict):
        d["solver"] = SolverOptions(**d["solver"])
    return GLowTestrParams(**d)


# name -> (runner, params factory)
POLICY_RUNNERS = {
    "g_lowtestr": (run_g_lowtestr, _make_g_lowtestr_params),
    "glm_ucb": (run_glm_ucb_baseline, lambda d: GlmUcbParams(**d)),
    "uniform_random": (run_uniform_random, lambda d: None if not d else _reject_params(d)),
}


def _reject_params(d):
    raise TypeError(f"uniform_random takes no parameters, got {sorted(d)}")


@dataclass(frozen=True)
class PolicySpec:
    name: str
    params: dict = field(default_factory=dict)
    label: str | None = None

    @property
    def display_name(self) -> str:
        return self.label or self.name

    def build_params(self):
        try:
            _, factory = POLICY_RUNNERS[self.name]
        except KeyError:
            raise ConfigError(f"unknown policy {self.name!r}; choose from {sorted(POLICY_RUNNERS)}") from None
        try:
            return factory(self.params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad parameters for {self.display_name}: {exc}") from None


@dataclass
class ExperimentConfig:
    """Flat experiment description; JSON keys mirror the field names."""

    d1: int = 10
    d2: int = 10
    d3: int = 3
    r: int = 1
    n_arms: int = 100
    family: str = "linear"
    noise_sigma: float = 0.01
    eta_clip: float = 3.0
    transform: str = "dct"
    transform_seed: int = 0
    normalize: bool = True
    # redraw W* and the arms for every replication; False reuses base_seed's instance
    redraw_instance: bool = True
    policies: list = field(default_factory=list)
    T: int = 3000
    replications: int = 10
    base_seed: int = 0
    output_dir: str = "results"
    emit_decision_log: bool = False

    def __post_init__(self):
        self.policies = [p if isinstance(p, PolicySpec) else PolicySpec(**p) for p in self.policies]

    def validate(self) -> "ExperimentConfig":
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if not self.policies:
            raise ConfigError("policies must be non-empty")
        if self.T < 2:
            raise ConfigError("T must be at least 2")
        if min(self.d1, self.d2, self.d3) < 1:
            raise ConfigError("dimensions must be positive")
        if not 1 <= self.r <= min(self.d1, self.d2):
            raise ConfigError(f"r must lie in [1, {min(self.d1, self.d2)}]")
        if self.n_arms < 2:
            raise ConfigError("n_arms must be at least 2")
        names = [p.display_name for p in self.policies]
        if len(set(names)) != len(names):
            raise ConfigError("policy labels must be unique")
        try:
            self.link_family()
            self.transform_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for p in self.policies:
            p.build_params()
        return self

    def link_family(self) -> LinkFamily:
        return LinkFamily(self.family, noise_sigma=self.noise_sigma, eta_clip=self.eta_clip)

    def transform_spec(self) -> TransformSpec:
        return TransformSpec.from_name(self.transform, self.d3, seed=self.transform_seed)

    def instance_seed(self, replication: int) -> int:
        return self.base_seed + replication if self.redraw_instance else self.base_seed

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["policies"] = [
            {k: v for k, v in dataclasses.asdict(p).items() if v is not None} for p in self.policies
        ]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)


@dataclass
class RunRecord:
    policy: str
    seed: int
    trace: RegretTrace | None
    wall_clock: float
    error: str | None = None
    decisions: list | None = None


@dataclass
class AggregateSummary:
    """Per-policy mean and standard deviation of cumulative regret by round.

    ``std`` is the population standard deviation over successful runs.
    """

    policies: list
    mean: dict
    std: dict
    n_runs: dict
    failures: dict
    final: dict
    wall_clock: dict
    runs: list = field(default_factory=list, repr=False)

    def final_table(self) -> str:
        lines = [f"{'policy':<20} {'mean final regret':>18} {'std':>10} {'runs':>5} {'failed':>6}"]
        for p in self.policies:
            m, s = self.final[p]
            lines.append(f"{p:<20} {m:>18.3f} {s:>10.3f} {self.n_runs[p]:>5d} {self.failures[p]:>6d}")
        return "\n".join(lines)


def _run_one(job):
    cfg, pidx, rep = job
    pol = cfg.policies[pidx]
    seed = cfg.base_seed + rep
    runner, _ = POLICY_RUNNERS[pol.name]
    params = pol.build_params()
    decisions = [] if cfg.emit_decision_log else None
    t0 = time.perf_counter()
    try:
        instance = generate_synthetic_instance(
            cfg.d1, cfg.d2, cfg.d3, cfg.r, cfg.n_arms, cfg.link_family(), cfg.transform_spec(),
            seed=cfg.instance_seed(rep), normalize=cfg.normalize,
        )
        trace = runner(instance, cfg.T, params, seed, decisions=decisions)
        trace.policy_name = pol.display_name
        err = None
    except Exception as exc:  # a failed run is recorded, not fatal
        trace, err = None, f"{type(exc).__name__}: {exc}"
    return RunRecord(pol.display_name, seed, trace, time.perf_counter() - t0, err, decisions)


def aggregate_traces(policies, runs, T) -> AggregateSummary:
    mean, std, n_runs, failures, final, clock = {}, {}, {}, {}, {}, {}
    for p in policies:
        mine = [r for r in runs if r.policy == p]
        ok = [r for r in mine if r.trace is not None]
        failures[p] = len(mine) - len(ok)
        n_runs[p] = len(ok)
        clock[p] = [r.wall_clock for r in mine]
        if ok:
            C = np.array([r.trace.cumulative for r in ok], dtype=float).reshape(len(ok), T)
            mean[p] = C.mean(axis=0)
            std[p] = C.std(axis=0)
            final[p] = (float(mean[p][-1]), float(std[p][-1]))
        else:
            mean[p] = std[p] = np.zeros(0)
            final[p] = (float("nan"), float("nan"))
    return AggregateSummary(list(policies), mean, std, n_runs, failures, final, clock, list(runs))


def run_experiment(config: ExperimentConfig, threads: int = 1, write: bool = True) -> AggregateSummary:
    """Run every (policy, replication) pair and aggregate.

    Replication ``i`` uses seed ``base_seed + i``; all policies in a
    replication see the same instance and the same reward streams. Runs are
    spread over ``threads`` worker processes and reduced in a fixed order, so
    the written aggregate does not depend on ``threads``.

    With ``write`` the following land in ``config.output_dir``:
    ``aggregate.csv``, ``traces/<policy>_seed<k>.csv``, ``summary.json``
    and, if requested, ``decisions/<policy>_seed<k>.csv``.
    """
    config.validate()
    jobs = [(config, j, i) for j in range(len(config.policies)) for i in range(config.replications)]
    if threads <= 1:
        runs = [_run_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(_run_one, jobs))
    names = [p.display_name for p in config.policies]
    summary = aggregate_traces(names, runs, config.T)
    if write:
        _write_outputs(config, summary)
    return summary


def _write_outputs(config, summary):
    out = Path(config.output_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    for r in summary.runs:
        if r.trace is not None:
            emit_csv(r.trace, out / "traces" / f"{r.policy}_seed{r.seed}.csv")
    if config.emit_decision_log:
        (out / "decisions").mkdir(exist_ok=True)
        for r in summary.runs:
            if r.decisions is not None:
                _write_rows(
                    out / "decisions" / f"{r.policy}_seed{r.seed}.csv",
                    DECISION_HEADER,
                    ([r.policy, r.seed, t, a, repr(float(b)), repr(float(m))] for t, a, b, m in r.decisions),
                )
    emit_csv(summary, out / "aggregate.csv")
    meta = {
        "config": config.to_dict(),
        "final": {p: {"mean": m, "std": s} for p, (m, s) in summary.final.items()},
        "n_runs": summary.n_runs,
        "failures": summary.failures,
        "errors": [{"policy": r.policy, "seed": r.seed, "error": r.error} for r in summary.runs if r.error],
        "wall_clock": summary.wall_clock,
        "info": {f"{r.policy}_seed{r.seed}": _jsonable(r.trace.info) for r in summary.runs if r.trace is not None},
    }
    with open(out / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2)


def _jsonable(d):
    return {k: (v.item() if isinstance(v, np.generic) else v) for k, v in d.items()}


def _write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit_csv(obj, path) -> None:
    """Write a :class:`RegretTrace` or :class:`AggregateSummary` as CSV.

    Floats are written with ``repr`` so parsing them back is exact. Rounds
    are 1-based.
    """
    path = os.fspath(path)
    if isinstance(obj, RegretTrace):
        rows = (
            [obj.policy_name, obj.seed, t + 1, a, repr(float(g)), repr(float(c))]
            for t, (a, g, c) in enumerate(zip(obj.arms, obj.instantaneous, obj.cumulative))
        )
        _write_rows(path, TRACE_HEADER, rows)
    elif isinstance(obj, AggregateSummary):
        rows = (
            [p, t + 1, repr(float(m)), repr(float(s)), obj.n_runs[p]]
            for p in obj.policies
            for t, (m, s) in enumerate(zip(obj.mean[p], obj.std[p]))
        )
        _write_rows(path, AGGREGATE_HEADER, rows)
    else:
        raise TypeError(f"cannot write {type(obj).__name__} as CSV")


def _read_rows(path, header):
    with open(path, encoding="utf-8", newline="") as fh:
        rd = csv.reader(fh)
        got = next(rd, None)
        if got != header:
            raise ValueError(f"{path}: expected header {header}, got {got}")
        return list(rd)


def read_trace_csv(path) -> RegretTrace:
    rows = _read_rows(path, TRACE_HEADER)
    if not rows:
        return RegretTrace(policy_name="", seed=0)
    trace = RegretTrace(policy_name=rows[0][0], seed=int(rows[0][1]))
    for row in rows:
        trace.arms.append(int(row[3]))
        trace.instantaneous.append(float(row[4]))
        trace.cumulative.append(float(row[5]))
    return trace


def read_aggregate_csv(path) -> dict:
    """Parse an aggregate CSV into ``{policy: (mean, std, n_runs)}`` arrays."""
    out: dict = {}
    for p, _, m, s, n in _read_rows(path, AGGREGATE_HEADER):
        out.setdefault(p, ([], [], int(n)))
        out[p][0].append(float(m))
        out[p][1].append(float(s))
    return {p: (np.array(m), np.array(s), n) for p, (m, s, n) in out.items()}
