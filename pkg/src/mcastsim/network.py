"""Waxman random networks on a planar grid."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .prng import Xoshiro256, derive_seed

DEFAULT_ALPHA = 0.25
CONNECT_MODES = ("patch", "reject")
MAX_DRAWS = 1000


class ConnectivityExhausted(RuntimeError):
    pass


class CalibrationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class WaxmanParams:
    n: int
    beta: float
    alpha: float = DEFAULT_ALPHA
    grid: tuple[float, float] = (1000.0, 1000.0)
    seed: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if min(self.grid) <= 0:
            raise ValueError(f"grid dimensions must be positive, got {self.grid}")


@dataclass(frozen=True, eq=False)
class Network:
    """Undirected graph whose edge weight (= delay) is the Euclidean link length.

    ``edges`` holds ``(u, v, weight)`` with ``u < v``, sorted.
    """

    coords: np.ndarray
    edges: tuple[tuple[int, int, float], ...]
    grid: tuple[float, float] = (1000.0, 1000.0)
    seed: int = 0
    _adj: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).reshape(-1, 2)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        adj: dict[int, dict[int, float]] = {v: {} for v in range(len(coords))}
        for u, v, w in self.edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if v in adj[u]:
                raise ValueError(f"parallel edge {u}-{v}")
            adj[u][v] = w
            adj[v][u] = w
        object.__setattr__(self, "_adj", adj)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def nodes(self) -> range:
        return range(self.n)

    def neighbors(self, v: int) -> dict[int, float]:
        return self._adj[v]

    def weight(self, u: int, v: int) -> float:
        return self._adj[u][v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in self._adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n

    def scaled(self, k: float) -> "Network":
        """Copy with coordinates, grid and every edge weight multiplied by ``k``."""
        coords = self.coords * k
        edges = tuple((u, v, _dist(coords, u, v)) for u, v, _ in self.edges)
        return Network(coords, edges, (self.grid[0] * k, self.grid[1] * k), self.seed)

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.seed == other.seed
            and np.array_equal(self.coords, other.coords)
            and self.edges == other.edges
        )

    __hash__ = None

    def dumps(self) -> str:
        w, h = self.grid
        lines = [f"n {self.n} grid {w!r} {h!r} seed {self.seed}"]
        lines += [f"node {i} {x!r} {y!r}" for i, (x, y) in enumerate(self.coords.tolist())]
        lines += [f"edge {u} {v} {wt:.9f}" for u, v, wt in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Network":
        """Parse the text dump. Weights are recomputed from the coordinates."""
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0][0] != "n" or len(lines[0]) != 7:
            raise ValueError("missing 'n <count> grid <w> <h> seed <seed>' header")
        head = lines[0]
        n = int(head[1])
        grid = (float(head[3]), float(head[4]))
        seed = int(head[6])
        coords = np.zeros((n, 2))
        pairs = []
        for lineno, parts in enumerate(lines[1:], start=2):
            if parts[0] == "node" and len(parts) == 4:
                coords[int(parts[1])] = (float(parts[2]), float(parts[3]))
            elif parts[0] == "edge" and len(parts) == 4:
                u, v = sorted((int(parts[1]), int(parts[2])))
                pairs.append((u, v))
            else:
                raise ValueError(f"line {lineno}: unrecognised record {' '.join(parts)!r}")
        edges = tuple((u, v, _dist(coords, u, v)) for u, v in sorted(pairs))
        return cls(coords, edges, grid, seed)


def _dist(coords, u, v) -> float:
    return math.hypot(coords[u][0] - coords[v][0], coords[u][1] - coords[v][1])


def average_degree(net: Network) -> float:
    if net.n == 0:
        return 0.0
    return 2.0 * len(net.edges) / net.n


# --- generation --------------------------------------------------------------


@dataclass
class _Draw:
    """Coordinates and per-pair uniforms of one attempt; reused across betas."""

    coords: np.ndarray
    iu: np.ndarray
    ju: np.ndarray
    dist: np.ndarray
    u: np.ndarray


def _draw(n: int, grid, seed: int, lane: str, attempt: int) -> _Draw:
    place = Xoshiro256(derive_seed(seed, "placement", lane, attempt))
    flat = place.uniforms(2 * n)
    coords = np.array(flat).reshape(n, 2) * np.array(grid, dtype=float)
    iu, ju = np.triu_indices(n, 1)
    links = Xoshiro256(derive_seed(seed, "network", lane, attempt))
    u = np.array(links.uniforms(len(iu)))
    diff = coords[iu] - coords[ju]
    dist = np.hypot(diff[:, 0], diff[:, 1])
    return _Draw(coords, iu, ju, dist, u)


def _waxman_mask(d: _Draw, alpha: float, beta: float, grid) -> np.ndarray:
    diag = math.hypot(*grid)
    return d.u < beta * np.exp(-d.dist / (alpha * diag))


def _components(n: int, iu, ju) -> np.ndarray:
    g = coo_matrix((np.ones(len(iu)), (iu, ju)), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    return labels


def _patch(d: _Draw, mask: np.ndarray) -> np.ndarray:
    """Join components by repeatedly adding the shortest inter-component link."""
    n = len(d.coords)
    mask = mask.copy()
    while True:
        labels = _components(n, d.iu[mask], d.ju[mask])
        if labels.max(initial=0) == 0:
            return mask
        cross = labels[d.iu] != labels[d.ju]
        k = np.flatnonzero(cross)[np.argmin(d.dist[cross])]
        mask[k] = True


def _build(d: _Draw, mask: np.ndarray, grid, seed: int) -> Network:
    idx = np.flatnonzero(mask)
    coords = d.coords
    edges = tuple(
        (int(i), int(j), _dist(coords, i, j)) for i, j in zip(d.iu[idx].tolist(), d.ju[idx].tolist())
    )
    return Network(coords, edges, tuple(float(g) for g in grid), seed)


def generate_waxman(params: WaxmanParams, connect: str = "patch") -> Network:
    """Place ``n`` nodes uniformly and draw each link with probability
    ``beta * exp(-d / (alpha * L))``, ``L`` the grid diagonal.

    ``connect="patch"`` links leftover components through their shortest
    inter-component pair; ``connect="reject"`` redraws with a fresh sub-seed
    until the draw is connected (at most ``MAX_DRAWS`` tries).
    """
    if connect not in CONNECT_MODES:
        raise ValueError(f"connect must be one of {CONNECT_MODES}")
    p = params
    if connect == "patch":
        d = _draw(p.n, p.grid, p.seed, "gen", 0)
        mask = _patch(d, _waxman_mask(d, p.alpha, p.beta, p.grid))
        return _build(d, mask, p.grid, p.seed)
    for attempt in range(MAX_DRAWS):
        d = _draw(p.n, p.grid, p.seed, "gen", attempt)
        mask = _waxman_mask(d, p.alpha, p.beta, p.grid)
        labels = _components(p.n, d.iu[mask], d.ju[mask])
        if labels.max(initial=0) == 0:
            return _build(d, mask, p.grid, p.seed)
    raise ConnectivityExhausted(
        f"{MAX_DRAWS} consecutive disconnected draws (n={p.n}, alpha={p.alpha}, beta={p.beta})"
    )


CALIBRATION_TRIALS = 32
CALIBRATION_ITERATIONS = 40
CALIBRATION_TOLERANCE = 0.1


@functools.lru_cache(maxsize=64)
def calibrate_beta(
    n: int,
    grid: tuple[float, float],
    alpha: float,
    target_degree: float,
    seed: int,
    connect: str = "patch",
) -> float:
    """Bisect beta so the mean degree over 32 trial draws hits ``target_degree``.

    Trials share their coordinates and pair uniforms across every bisection
    step, which makes the raw link set monotone in beta. In ``"patch"`` mode
    the measured degree includes the patch links; in ``"reject"`` mode it is
    the raw Waxman degree.
    """
    if not 0 < target_degree < n - 1:
        raise ValueError(f"target degree must lie in (0, {n - 1}), got {target_degree}")
    grid = tuple(float(g) for g in grid)
    draws = [_draw(n, grid, seed, "calibrate", t) for t in range(CALIBRATION_TRIALS)]

    def mean_degree(beta: float) -> float:
        total = 0
        for d in draws:
            mask = _waxman_mask(d, alpha, beta, grid)
            if connect == "patch":
                mask = _patch(d, mask)
            total += int(mask.sum())
        return 2.0 * total / (n * len(draws))

    hi_deg = mean_degree(1.0)
    if hi_deg < target_degree - CALIBRATION_TOLERANCE:
        raise CalibrationFailed(
            f"target degree {target_degree} unreachable: beta=1 gives {hi_deg:.3f}"
        )
    lo, hi = 0.0, 1.0
    best, best_err = 1.0, abs(hi_deg - target_degree)
    for _ in range(CALIBRATION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        deg = mean_degree(mid)
        err = abs(deg - target_degree)
        if err < best_err:
            best, best_err = mid, err
        if err <= 0.01:
            break
        if deg < target_degree:
            lo = mid
        else:
            hi = mid
    if best_err > CALIBRATION_TOLERANCE:
        raise CalibrationFailed(
            f"target degree {target_degree} not bracketed; closest mean degree off by {best_err:.3f}"
        )
    return best
