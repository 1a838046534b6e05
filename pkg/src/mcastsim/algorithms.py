"""Attachment-point policies for dynamic shared trees.

Every greedy-family policy scores each on-tree node ``a`` as a place to graft
the joining node ``v`` and picks the minimum:

    GRD   d(v,a)
    WGT   (1-w) d(v,a) + w d(a,core)
    SOPT  d(v,a) + w max over sources s of tree_dist(s,a)
    TOPT  d(v,a) + 2w mean over all nodes x of d(a,x)
    MDT   d(v,a) + w max over tree leaves e of tree_dist(e,a)

``d`` is the unicast shortest delay. CBT always routes the join to the core.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .routing import DistanceTable, shortest_path
from .tree import MulticastTree

KINDS = ("CBT", "GRD", "WGT", "SOPT", "TOPT", "MDT")
TIE_RTOL = 1e-12


class CoreMissing(ValueError):
    pass


class NoSources(ValueError):
    pass


@dataclass(frozen=True)
class AlgorithmConfig:
    kind: str
    omega: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown algorithm {self.kind!r}; expected one of {KINDS}")
        if self.kind == "WGT" and not 0 <= self.omega <= 0.5:
            raise ValueError(f"WGT omega must lie in [0, 0.5], got {self.omega}")
        if self.kind in ("SOPT", "TOPT", "MDT") and self.omega < 0:
            raise ValueError(f"{self.kind} omega must be >= 0, got {self.omega}")

    @property
    def keeps_core(self) -> bool:
        return self.kind in ("CBT", "WGT")

    def label(self) -> str:
        if self.kind in ("CBT", "GRD"):
            return self.kind
        return f"{self.kind}({self.omega:g})"


# --- scalar weights ----------------------------------------------------------


def weight_grd(dt: DistanceTable, tree: MulticastTree, a: int, v: int) -> float:
    return float(dt.dist[v, a])


def weight_wgt(dt: DistanceTable, tree: MulticastTree, a: int, v: int, omega: float) -> float:
    if tree.core is None:
        raise CoreMissing("weighted greedy needs an owner (core) node")
    return (1 - omega) * float(dt.dist[v, a]) + omega * float(dt.dist[a, tree.core])


def weight_sopt(dt, tree: MulticastTree, a: int, v: int, omega: float, sources=None) -> float:
    sources = tree.sources if sources is None else sources
    if not sources:
        raise NoSources("SOPT weight needs at least one source")
    return float(dt.dist[v, a]) + omega * max(tree.tree_distance(s, a) for s in sources)


def weight_topt(dt: DistanceTable, tree: MulticastTree, a: int, v: int, omega: float) -> float:
    return float(dt.dist[v, a]) + 2 * omega * float(dt.avg_dist[a])


def weight_mdt(dt: DistanceTable, tree: MulticastTree, a: int, v: int, omega: float) -> float:
    far = max(tree.tree_distance(e, a) for e in tree.leaves())
    return float(dt.dist[v, a]) + omega * far


# --- vectorised selection ----------------------------------------------------


def candidate_weights(cfg: AlgorithmConfig, dt: DistanceTable, tree: MulticastTree, v: int):
    """``(candidates, weights)`` over all tree nodes, candidates ascending.

    A SOPT tree with no current source (possible under dynamic sources)
    scores by branch length alone.
    """
    cand = tree.node_array()
    w = dt.dist[v, cand]
    kind, omega = cfg.kind, cfg.omega
    if kind == "WGT":
        if tree.core is None:
            raise CoreMissing("weighted greedy needs an owner (core) node")
        w = (1 - omega) * w + omega * dt.dist[cand, tree.core]
    elif kind == "SOPT" and tree.sources and omega:
        src = np.fromiter(tree.sources, dtype=np.int64)
        w = w + omega * tree.td[np.ix_(src, cand)].max(axis=0)
    elif kind == "TOPT" and omega:
        w = w + 2 * omega * dt.avg_dist[cand]
    elif kind == "MDT" and omega:
        leaves = np.flatnonzero(tree.leaf_mask())
        w = w + omega * tree.td[np.ix_(leaves, cand)].max(axis=0)
    return cand, w


def argmin_lowest_id(cand: np.ndarray, w: np.ndarray) -> int:
    """Minimum weight; near-ties (relative 1e-12) go to the lowest id."""
    best = w.min()
    tol = TIE_RTOL * max(1.0, abs(best))
    return int(cand[np.flatnonzero(w <= best + tol)[0]])


def select_attachment(cfg: AlgorithmConfig, dt: DistanceTable, tree: MulticastTree, v: int) -> int:
    if len(tree) == 0:
        raise ValueError("empty tree has no attachment point")
    if cfg.kind == "CBT":
        if tree.core is None:
            raise CoreMissing("CBT needs a core")
        return tree.core
    cand, w = candidate_weights(cfg, dt, tree, v)
    return argmin_lowest_id(cand, w)


def join(
    cfg: AlgorithmConfig,
    dt: DistanceTable,
    tree: MulticastTree,
    v: int,
    member: bool = True,
    source: bool = False,
) -> MulticastTree:
    """Graft the shortest path from ``v`` to its selected attachment point."""
    if len(tree) == 0 or v in tree:
        tree.graft([v], member=member, source=source)
        return tree
    a = select_attachment(cfg, dt, tree, v)
    tree.graft(shortest_path(dt, v, a), member=member, source=source)
    return tree
