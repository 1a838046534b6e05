"""Tree evaluation criteria and the exponential delay-vs-size law."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tree import MulticastTree


@dataclass(frozen=True)
class MeasurementRecord:
    algo: str
    omega: float
    group_size: int
    avg_delay: float
    max_delay: float
    link_count: int
    bandwidth: float
    diameter: float
    event_index: int
    seed: int = 0
    degree: float = float("nan")
    n_sources: int = 0
    source_fraction: float = float("nan")
    family: str = "run"
    repeat: int = 0


def _pair_delays(tree: MulticastTree, sources, receivers) -> np.ndarray:
    src = np.fromiter(sources, dtype=np.int64)
    rcv = np.fromiter(receivers, dtype=np.int64)
    if not len(src) or not len(rcv):
        return np.zeros(0)
    block = tree.td[np.ix_(src, rcv)]
    return block[src[:, None] != rcv[None, :]]


def average_delay(tree: MulticastTree, sources, receivers) -> float:
    """Mean tree delay over ordered (source, receiver) pairs, self-pairs excluded."""
    d = _pair_delays(tree, sources, receivers)
    return float(d.mean()) if d.size else 0.0


def maximum_delay(tree: MulticastTree, sources, receivers) -> float:
    d = _pair_delays(tree, sources, receivers)
    return float(d.max()) if d.size else 0.0


def link_usage(tree: MulticastTree) -> int:
    return tree.link_count()


def bandwidth_usage(tree: MulticastTree, source_rate: float = 1.0, n_active_sources: int = 1) -> float:
    if source_rate < 0:
        raise ValueError("source rate must be non-negative")
    return link_usage(tree) * source_rate * n_active_sources


# --- exponential fit ---------------------------------------------------------


class DegenerateFit(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    h: float
    a: float
    b: float
    rms_residual: float

    def predict(self, x):
        return self.h - self.a * np.exp(-np.asarray(x, dtype=float) / self.b)

    def csv_row(self, precision: int = 6) -> str:
        return ",".join(f"{v:.{precision}f}" for v in (self.h, self.a, self.b, self.rms_residual))


def _linear_ha(x, y, b):
    """Least-squares (h, a) for fixed b, plus the residual sum of squares."""
    design = np.column_stack([np.ones_like(x), -np.exp(-x / b)])
    (h, a), *_ = np.linalg.lstsq(design, y, rcond=None)
    r = y - design @ np.array([h, a])
    return h, a, float(r @ r)


def fit_exponential(points, max_iter: int = 100, trace: list | None = None) -> FitResult:
    """Fit ``y = h - a * exp(-x / b)`` by least squares.

    A log-spaced scan over b in [1, 200] (h, a solved linearly at each b)
    seeds a damped Gauss-Newton refinement of all three parameters; a step
    that raises the residual is halved until it does not. Accepted residual
    sums are appended to ``trace`` when given.

    Raises DegenerateFit for a (numerically) constant series; the exception
    carries the conventional result ``h = mean, a = 0, b = 1`` as ``.result``.
    """
    pts = sorted((float(x), float(y)) for x, y in points)
    if len(pts) < 4:
        raise ValueError("need at least 4 points")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(np.diff(x) <= 0):
        raise ValueError("x values must be strictly increasing")
    if y.var() < 1e-12:
        err = DegenerateFit("y is constant")
        err.result = FitResult(float(y.mean()), 0.0, 1.0, float(np.sqrt(np.mean((y - y.mean()) ** 2))))
        raise err

    best = None
    for b in np.logspace(0, math.log10(200), 200):
        h, a, sse = _linear_ha(x, y, b)
        if best is None or sse < best[3]:
            best = (h, a, b, sse)
    h, a, b, sse = best
    theta = np.array([h, a, b])

    def residual(t):
        return y - (t[0] - t[1] * np.exp(-x / t[2]))

    r = residual(theta)
    sse = float(r @ r)
    if trace is not None:
        trace.append(sse)
    for _ in range(max_iter):
        e = np.exp(-x / theta[2])
        # Jacobian of the model w.r.t. (h, a, b)
        jac = np.column_stack([np.ones_like(x), -e, -theta[1] * e * x / theta[2] ** 2])
        step, *_ = np.linalg.lstsq(jac, r, rcond=None)
        lam = 1.0
        accepted = False
        while lam > 1e-10:
            cand = theta + lam * step
            if cand[2] > 0:
                rc = residual(cand)
                sc = float(rc @ rc)
                if sc <= sse:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            break
        converged = np.all(np.abs(cand - theta) <= 1e-13 * np.maximum(1.0, np.abs(theta)))
        theta, r, sse = cand, rc, sc
        if trace is not None:
            trace.append(sse)
        if converged or sse == 0.0:
            break
    return FitResult(float(theta[0]), float(theta[1]), float(theta[2]), math.sqrt(sse / len(x)))
