"""Unicast substrate: all-pairs shortest delays, next hops and path extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .network import Network

TIE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class DistanceTable:
    dist: np.ndarray
    next_hop: np.ndarray
    avg_dist: np.ndarray

    @property
    def n(self) -> int:
        return len(self.dist)


def weight_matrix(net: Network) -> csr_matrix:
    n = net.n
    if not net.edges:
        return csr_matrix((n, n))
    u, v, w = (np.array(col) for col in zip(*net.edges))
    return csr_matrix((np.r_[w, w], (np.r_[u, v], np.r_[v, u])), shape=(n, n))


def build_distance_table(net: Network) -> DistanceTable:
    """All-pairs shortest paths by summed link delay.

    When two shortest paths tie, the one leaving through the lower-numbered
    neighbour wins.
    """
    n = net.n
    dist = dijkstra(weight_matrix(net), directed=False)
    if not np.isfinite(dist).all():
        raise ValueError("network is not connected")
    next_hop = np.full((n, n), -1, dtype=np.int64)
    for u in range(n):
        row = next_hop[u]
        row[u] = u
        slack = TIE_RTOL * np.maximum(1.0, dist[u])
        for x in sorted(net.neighbors(u)):
            via = net.weight(u, x) + dist[x]
            hit = (row < 0) & (via <= dist[u] + slack)
            row[hit] = x
    avg = dist.mean(axis=1) if n else np.zeros(0)
    for arr in (dist, next_hop, avg):
        arr.setflags(write=False)
    return DistanceTable(dist, next_hop, avg)


def shortest_path(dt: DistanceTable, u: int, v: int) -> list[int]:
    path = [u]
    while path[-1] != v:
        path.append(int(dt.next_hop[path[-1], v]))
        if len(path) > dt.n:
            raise RuntimeError(f"next-hop loop between {u} and {v}")
    return path


def node_average_distance(dt: DistanceTable, a: int) -> float:
    return float(dt.avg_dist[a])
