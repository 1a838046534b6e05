"""Flat ``key = value`` run configuration and CSV emission."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields

from .algorithms import KINDS, AlgorithmConfig
from .churn import DYNAMIC, STATIC, Scenario
from .experiments import DEFAULT_OMEGA, DEGREES, OMEGA_GRID, ExperimentSpec
from .metrics import MeasurementRecord
from .network import CONNECT_MODES, DEFAULT_ALPHA


class ParseError(ValueError):
    def __init__(self, problems: list[tuple[int, str]]):
        self.problems = problems
        super().__init__("\n".join(f"line {n}: {msg}" for n, msg in problems))


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _algos(text):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        kind, _, omega = item.partition(":")
        kind = kind.strip().upper()
        if kind not in KINDS:
            raise ValueError(f"unknown algorithm {kind!r}")
        out.append(AlgorithmConfig(kind, float(omega) if omega else DEFAULT_OMEGA[kind]))
    return tuple(out)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 1
    nodes: int = 200
    degree: float = 3.0
    degrees: tuple[float, ...] = DEGREES
    alpha: float = DEFAULT_ALPHA
    beta: float | None = None
    grid_width: float = 1000.0
    grid_height: float = 1000.0
    connect: str = "patch"
    algo: str = "GRD"
    omega: float | None = None
    algorithms: tuple[AlgorithmConfig, ...] = field(
        default_factory=lambda: _algos("CBT,GRD,SOPT,TOPT,MDT")
    )
    omega_grid: tuple[float, ...] = OMEGA_GRID
    sweep_algorithms: tuple[AlgorithmConfig, ...] = field(
        default_factory=lambda: _algos("CBT,SOPT,TOPT,MDT")
    )
    model: str = STATIC
    sources: int = 1
    sources_grid: tuple[int, ...] = (1, 2, 3, 5)
    source_fraction: float = 0.0
    fractions: tuple[float, ...] = (0.1, 0.5, 0.9)
    size_min: int = 5
    size_max: int = 90
    targets: tuple[int, ...] = (10, 20, 40, 80)
    events: int = 20_000
    warmup: int = 500
    repeats: int = 50
    sample_every: int = 100
    workers: int = 1
    source_rate: float = 1.0
    count_active_sources: bool = False
    output: str = ""
    precision: int = 6

    # --- derived objects ---------------------------------------------------

    def algorithm(self) -> AlgorithmConfig:
        omega = DEFAULT_OMEGA[self.algo] if self.omega is None else self.omega
        return AlgorithmConfig(self.algo, omega)

    def scenario(self) -> Scenario:
        return Scenario(
            model=self.model,
            n_sources=self.sources,
            source_fraction=self.source_fraction,
            size_min=self.size_min,
            size_max=self.size_max,
            target_sizes=self.targets,
            event_count=self.events,
            seed=self.seed,
            warmup=self.warmup,
            source_rate=self.source_rate,
            count_active_sources=self.count_active_sources,
        )

    def experiment(self, family: str) -> ExperimentSpec:
        algorithms = self.sweep_algorithms if family == "omega" else self.algorithms
        degrees = self.degrees if family == "degree" else (self.degree,)
        return ExperimentSpec(
            family=family,
            algorithms=algorithms,
            omega_grid=self.omega_grid,
            degrees=degrees,
            n_sources_grid=self.sources_grid,
            fractions=self.fractions,
            repeats=self.repeats,
            base_seed=self.seed,
            scenario=self.scenario(),
            n_nodes=self.nodes,
            grid=(self.grid_width, self.grid_height),
            alpha=self.alpha,
            sample_every=self.sample_every,
            workers=self.workers,
        )


_PARSERS = {
    "seed": int, "nodes": int, "degree": float, "degrees": _floats, "alpha": float,
    "beta": float, "grid_width": float, "grid_height": float, "connect": str.strip,
    "algo": lambda t: t.strip().upper(), "omega": float, "algorithms": _algos,
    "omega_grid": _floats, "sweep_algorithms": _algos, "model": lambda t: t.strip().lower(),
    "sources": int, "sources_grid": _ints, "source_fraction": float, "fractions": _floats,
    "size_min": int, "size_max": int, "targets": _ints, "events": int, "warmup": int,
    "repeats": int, "sample_every": int, "workers": int, "source_rate": float,
    "count_active_sources": _bool, "output": str.strip, "precision": int,
}
assert set(_PARSERS) == {f.name for f in fields(RunConfig)}


def _range_problems(cfg: RunConfig) -> list[tuple[str, str]]:
    """``(key, message)`` for every out-of-range setting."""
    out = []

    def need(ok, key, msg):
        if not ok:
            out.append((key, msg))

    need(0 <= cfg.seed < 2**64, "seed", "must be a 64-bit unsigned integer")
    need(cfg.nodes >= 1, "nodes", "must be >= 1")
    need(cfg.alpha > 0, "alpha", "must be > 0")
    need(cfg.beta is None or 0 < cfg.beta <= 1, "beta", "must lie in (0, 1]")
    need(cfg.grid_width > 0 and cfg.grid_height > 0, "grid_width", "grid must be positive")
    need(cfg.connect in CONNECT_MODES, "connect", f"must be one of {', '.join(CONNECT_MODES)}")
    need(0 < cfg.degree < cfg.nodes - 1 or cfg.nodes < 3, "degree", f"must lie in (0, nodes-1)")
    need(all(0 < d < cfg.nodes - 1 for d in cfg.degrees) and cfg.degrees, "degrees",
         "every degree must lie in (0, nodes-1)")
    need(cfg.algo in KINDS, "algo", f"must be one of {', '.join(KINDS)}")
    if cfg.omega is not None and cfg.algo in KINDS:
        if cfg.algo == "WGT":
            need(0 <= cfg.omega <= 0.5, "omega", "WGT omega must lie in [0, 0.5]")
        elif cfg.algo in ("SOPT", "TOPT", "MDT"):
            need(cfg.omega >= 0, "omega", f"{cfg.algo} omega must be >= 0")
    need(cfg.omega_grid and all(w >= 0 for w in cfg.omega_grid), "omega_grid",
         "must be a non-empty list of non-negative values")
    need(cfg.model in (STATIC, DYNAMIC), "model", f"must be {STATIC} or {DYNAMIC}")
    need(cfg.size_min >= 1, "size_min", "must be >= 1")
    need(cfg.size_max >= cfg.size_min, "size_max", "must be >= size_min")
    need(1 <= cfg.sources < cfg.size_max, "sources", "must lie in [1, size_max)")
    need(all(1 <= k < cfg.size_max for k in cfg.sources_grid), "sources_grid",
         "every count must lie in [1, size_max)")
    need(0 <= cfg.source_fraction <= 1, "source_fraction", "must lie in [0, 1]")
    need(all(0 <= f <= 1 for f in cfg.fractions), "fractions", "every fraction must lie in [0, 1]")
    need(all(cfg.size_min <= t <= cfg.size_max for t in cfg.targets), "targets",
         "every target must lie in [size_min, size_max]")
    need(cfg.events >= 0, "events", "must be >= 0")
    need(cfg.warmup >= 0, "warmup", "must be >= 0")
    need(cfg.repeats >= 1, "repeats", "must be >= 1")
    need(cfg.sample_every >= 1, "sample_every", "must be >= 1")
    need(cfg.workers >= 1, "workers", "must be >= 1")
    need(cfg.source_rate >= 0, "source_rate", "must be >= 0")
    need(0 <= cfg.precision <= 17, "precision", "must lie in [0, 17]")
    return out


def parse_config(text: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Parse ``key = value`` lines (``#`` starts a comment).

    Every bad line is collected before raising one ParseError. ``overrides``
    (e.g. from the command line) are applied after the file, reported as
    line 0.
    """
    problems: list[tuple[int, str]] = []
    values: dict[str, object] = {}
    where: dict[str, int] = {}
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append((lineno, f"expected 'key = value', got {line!r}"))
            continue
        key, _, value = (s.strip() for s in line.partition("="))
        entries.append((lineno, key, value))
    entries += [(0, k, v) for k, v in (overrides or {}).items()]
    for lineno, key, value in entries:
        if key not in _PARSERS:
            problems.append((lineno, f"unknown key {key!r}"))
            continue
        try:
            values[key] = _PARSERS[key](value)
            where[key] = lineno
        except ValueError as exc:
            problems.append((lineno, f"{key}: {exc}"))
    cfg = RunConfig(**values)
    # range checks see the lines that parsed, so one pass reports everything
    problems += [(where.get(k, 0), f"{k} = {getattr(cfg, k)!r}: {msg}") for k, msg in _range_problems(cfg)]
    if problems:
        raise ParseError(sorted(problems, key=lambda p: p[0]))
    return cfg


# --- CSV -----------------------------------------------------------------------

CSV_COLUMNS = (
    "family", "algo", "omega", "degree", "n_sources", "source_fraction", "group_size",
    "repeat", "seed", "event_index", "avg_delay", "max_delay", "link_count", "bandwidth",
    "diameter",
)
_FLOAT_COLUMNS = {"omega", "degree", "source_fraction", "avg_delay", "max_delay", "bandwidth", "diameter"}


def _fmt(value, precision: int, is_float: bool) -> str:
    if is_float:
        value = float(value)
        return "nan" if math.isnan(value) else f"{value:.{precision}f}"
    return str(value)


def _sort_key(r: MeasurementRecord):
    deg = -math.inf if math.isnan(r.degree) else r.degree
    return (r.algo, r.omega, deg, r.group_size, r.repeat)


def format_csv(records, precision: int = 6) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in sorted(records, key=_sort_key):
        lines.append(",".join(
            _fmt(getattr(r, c), precision, c in _FLOAT_COLUMNS) for c in CSV_COLUMNS
        ))
    return "\n".join(lines) + "\n"


def emit_csv(records, path, precision: int = 6) -> int:
    """Write records as CSV (header first, rows sorted by algo, omega,
    degree, group size, repeat). Returns the number of bytes written."""
    data = format_csv(records, precision).encode("utf-8")
    with open(os.fspath(path), "wb") as fh:
        fh.write(data)
    return len(data)
