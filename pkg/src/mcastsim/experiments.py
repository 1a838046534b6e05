"""Experiment families: omega, degree, group-size, source-count, dynamic-source
sweeps and stability traces.

Within one repeat every algorithm sees the same network and the same event
stream. Repeats are independent and merged in repeat order, so results are a
pure function of the spec whatever the worker count.
"""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .algorithms import AlgorithmConfig
from .churn import DYNAMIC, STATIC, EventStream, Scenario, Session, gen_event_stream, run_session
from .metrics import FitResult, MeasurementRecord, fit_exponential, DegenerateFit
from .network import DEFAULT_ALPHA, calibrate_beta, generate_waxman, WaxmanParams
from .prng import derive_seed
from .routing import build_distance_table

FAMILIES = ("omega", "degree", "size", "sources", "dynamic", "stability", "run")

# operating points proposed for the three new policies
DEFAULT_OMEGA = {"CBT": 0.0, "GRD": 0.0, "WGT": 0.3, "SOPT": 0.6, "TOPT": 0.8, "MDT": 0.4}
OMEGA_GRID = (0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4)
DEGREES = (2.5, 3.0, 3.5, 4.0, 4.5, 5.0)


def default_algorithms(kinds=("CBT", "GRD", "SOPT", "TOPT", "MDT")) -> tuple[AlgorithmConfig, ...]:
    return tuple(AlgorithmConfig(k, DEFAULT_OMEGA[k]) for k in kinds)


@dataclass(frozen=True)
class ExperimentSpec:
    family: str = "run"
    algorithms: tuple[AlgorithmConfig, ...] = field(default_factory=default_algorithms)
    omega_grid: tuple[float, ...] = OMEGA_GRID
    degrees: tuple[float, ...] = (3.0,)
    n_sources_grid: tuple[int, ...] = (1, 2, 3, 5)
    fractions: tuple[float, ...] = (0.1, 0.5, 0.9)
    repeats: int = 50
    base_seed: int = 1
    scenario: Scenario = field(default_factory=Scenario)
    n_nodes: int = 200
    grid: tuple[float, float] = (1000.0, 1000.0)
    alpha: float = DEFAULT_ALPHA
    sample_every: int = 100
    workers: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        for name in ("algorithms", "degrees"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")


# --- per-repeat work ---------------------------------------------------------


@dataclass(frozen=True)
class _Job:
    spec: ExperimentSpec
    repeat: int
    degree: float
    scenario: Scenario
    configs: tuple[AlgorithmConfig, ...]
    trace: bool = False


def network_for(spec: ExperimentSpec, degree: float, repeat: int):
    beta = calibrate_beta(
        spec.n_nodes, tuple(spec.grid), spec.alpha, degree, derive_seed(spec.base_seed, "calibrate")
    )
    seed = derive_seed(spec.base_seed, "repeat", repeat)
    net = generate_waxman(WaxmanParams(spec.n_nodes, beta, spec.alpha, tuple(spec.grid), seed))
    return net, build_distance_table(net)


def _run_job(job: _Job) -> list[MeasurementRecord]:
    spec = job.spec
    net, dt = network_for(spec, job.degree, job.repeat)
    scenario = replace(job.scenario, seed=derive_seed(spec.base_seed, "stream", job.repeat))
    stream = gen_event_stream(scenario, net.n)
    out: list[MeasurementRecord] = []
    for cfg in job.configs:
        recs = _trace(net, dt, cfg, scenario, stream, spec.sample_every) if job.trace else \
            run_session(net, dt, cfg, scenario, stream)
        out += [
            replace(r, family=spec.family, degree=job.degree, repeat=job.repeat) for r in recs
        ]
    return out


def _trace(net, dt, cfg, scenario, stream: EventStream, every: int):
    session = Session(net, dt, cfg, scenario)
    out = []
    for ev in stream:
        session.apply(ev)
        k = ev.index - stream.n_initial + 1
        if k > 0 and k % every == 0:
            out.append(session.measure(ev.index))
    return out


def _run_jobs(jobs: list[_Job], workers: int) -> list[MeasurementRecord]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_job, jobs))
    else:
        chunks = [_run_job(j) for j in jobs]
    return [r for chunk in chunks for r in chunk]


# --- aggregation -------------------------------------------------------------

METRICS = ("avg_delay", "max_delay", "link_count", "bandwidth", "diameter")


def summarize(records, keys, warmup: int) -> list[dict]:
    """Mean of each metric per key: records of one repeat are averaged first,
    then repeats are averaged with equal weight. Records before ``warmup``
    are dropped."""
    per_repeat: dict = defaultdict(lambda: defaultdict(list))
    for r in records:
        if r.event_index < warmup:
            continue
        k = tuple(getattr(r, name) for name in keys)
        per_repeat[k][r.repeat].append(r)
    rows = []
    for k in sorted(per_repeat, key=_sort_key):
        reps = per_repeat[k]
        row = dict(zip(keys, k))
        for m in METRICS:
            row[m] = float(np.mean([np.mean([getattr(r, m) for r in rs]) for rs in reps.values()]))
        row["repeats"] = len(reps)
        row["records"] = sum(len(rs) for rs in reps.values())
        rows.append(row)
    return rows


def _sort_key(k):
    return tuple((0, x) if isinstance(x, (int, float)) else (1, str(x)) for x in k)


@dataclass
class Result:
    records: list[MeasurementRecord]
    rows: list[dict]
    optima: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)

    def value(self, metric: str, **where) -> float:
        hits = [r for r in self.rows if all(r.get(k) == v for k, v in where.items())]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} rows match {where}")
        return hits[0][metric]


# --- families ----------------------------------------------------------------


def sweep_omega(spec: ExperimentSpec) -> Result:
    """Every (algorithm, omega) pair over ``repeats`` fresh networks.

    CBT and GRD in ``algorithms`` run once per repeat as references.
    ``optima[algo]`` holds the omega minimising mean average and mean
    maximum delay (ties to the smaller omega).
    """
    configs = []
    for cfg in spec.algorithms:
        if cfg.kind in ("CBT", "GRD"):
            configs.append(AlgorithmConfig(cfg.kind))
        else:
            configs += [AlgorithmConfig(cfg.kind, w) for w in spec.omega_grid]
    degree = spec.degrees[0]
    jobs = [_Job(spec, r, degree, spec.scenario, tuple(configs)) for r in range(spec.repeats)]
    records = _run_jobs(jobs, spec.workers)
    rows = summarize(records, ("algo", "omega"), spec.scenario.warmup)
    optima = {}
    for algo in dict.fromkeys(r["algo"] for r in rows if r["algo"] not in ("CBT", "GRD")):
        mine = [r for r in rows if r["algo"] == algo]
        optima[algo] = {
            "avg_delay": min(mine, key=lambda r: (r["avg_delay"], r["omega"]))["omega"],
            "max_delay": min(mine, key=lambda r: (r["max_delay"], r["omega"]))["omega"],
        }
    return Result(records, rows, optima=optima)


def sweep_degree(spec: ExperimentSpec) -> Result:
    jobs = [
        _Job(spec, r, d, spec.scenario, tuple(spec.algorithms))
        for d in spec.degrees
        for r in range(spec.repeats)
    ]
    records = _run_jobs(jobs, spec.workers)
    return Result(records, summarize(records, ("degree", "algo", "omega"), spec.scenario.warmup))


def sweep_group_size(spec: ExperimentSpec) -> Result:
    """Metrics at each target size, plus an exponential fit of average delay
    against size per algorithm when at least four sizes are present."""
    if not spec.scenario.target_sizes:
        return Result([], [])
    jobs = [_Job(spec, r, spec.degrees[0], spec.scenario, tuple(spec.algorithms))
            for r in range(spec.repeats)]
    records = _run_jobs(jobs, spec.workers)
    rows = summarize(records, ("group_size", "algo", "omega"), spec.scenario.warmup)
    fits = {}
    for algo in dict.fromkeys(r["algo"] for r in rows):
        pts = sorted((r["group_size"], r["avg_delay"]) for r in rows if r["algo"] == algo)
        if len(pts) >= 4:
            try:
                fits[algo] = fit_exponential(pts)
            except DegenerateFit as exc:
                fits[algo] = exc.result
    return Result(records, rows, fits=fits)


def sweep_sources(spec: ExperimentSpec) -> Result:
    jobs = []
    for k in spec.n_sources_grid:
        sc = replace(spec.scenario, model=STATIC, n_sources=k)
        jobs += [_Job(spec, r, spec.degrees[0], sc, tuple(spec.algorithms)) for r in range(spec.repeats)]
    records = _run_jobs(jobs, spec.workers)
    return Result(records, summarize(records, ("n_sources", "algo", "omega"), spec.scenario.warmup))


def run_dynamic_fraction(spec: ExperimentSpec) -> Result:
    """Dynamic-source model at each source fraction; fraction 0 runs as a
    single static source."""
    jobs = []
    for f in spec.fractions:
        sc = replace(spec.scenario, model=DYNAMIC, source_fraction=f)
        jobs += [_Job(spec, r, spec.degrees[0], sc, tuple(spec.algorithms)) for r in range(spec.repeats)]
    records = _run_jobs(jobs, spec.workers)
    for i, r in enumerate(records):
        if r.n_sources:  # fraction-0 runs were mapped to one static source
            records[i] = replace(r, source_fraction=0.0)
    return Result(records, summarize(records, ("source_fraction", "algo", "omega"), spec.scenario.warmup))


@dataclass
class Stability:
    worst_trace: list[tuple[int, float]]
    best_trace: list[tuple[int, float]]
    worst_level: float
    best_level: float

    @property
    def gap(self) -> float:
        return self.worst_level - self.best_level


@dataclass
class StabilityResult(Result):
    per_algo: dict = field(default_factory=dict)
    cbt_avg_worst: float = float("nan")
    cbt_avg_best: float = float("nan")


def stability_run(spec: ExperimentSpec) -> StabilityResult:
    """Traced sessions per algorithm.

    A trace's level is its time-averaged maximum delay; the worst (best)
    trace of an algorithm is the repeat with the highest (lowest) level.
    CBT's worst and best levels are reported separately as reference lines.
    """
    jobs = [_Job(spec, r, spec.degrees[0], spec.scenario, tuple(spec.algorithms), trace=True)
            for r in range(spec.repeats)]
    records = _run_jobs(jobs, spec.workers)
    by: dict = defaultdict(lambda: defaultdict(list))
    for r in records:
        by[(r.algo, r.omega)][r.repeat].append((r.event_index, r.max_delay))
    per_algo = {}
    for (algo, omega), reps in by.items():
        levels = {k: float(np.mean([d for _, d in tr])) for k, tr in reps.items()}
        order = sorted(levels, key=lambda k: (levels[k], k))
        best, worst = order[0], order[-1]
        per_algo[AlgorithmConfig(algo, omega).label()] = Stability(
            reps[worst], reps[best], levels[worst], levels[best]
        )
    result = StabilityResult(records, summarize(records, ("algo", "omega"), 0), per_algo=per_algo)
    if "CBT" in per_algo:
        result.cbt_avg_worst = per_algo["CBT"].worst_level
        result.cbt_avg_best = per_algo["CBT"].best_level
    return result


FAMILY_RUNNERS = {
    "omega": sweep_omega,
    "degree": sweep_degree,
    "size": sweep_group_size,
    "sources": sweep_sources,
    "dynamic": run_dynamic_fraction,
    "stability": stability_run,
}
