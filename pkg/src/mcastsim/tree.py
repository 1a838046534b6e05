"""Shared multicast tree state: grafting, pruning and tree-path distances."""

from __future__ import annotations

import numpy as np

from .network import Network


class PathDetached(ValueError):
    pass


class NotAMember(KeyError):
    pass


class NotInTree(KeyError):
    pass


class TreeInvariantError(AssertionError):
    pass


class MulticastTree:
    """A tree over network nodes plus its member, source and core flags.

    Tree-path distances between every pair of tree nodes are kept in a dense
    matrix ``td``. Grafting a pendant chain or pruning a leaf chain never
    changes the distance between two nodes that stay in the tree, so a new
    node's row is its parent's row plus the link weight and nothing else is
    ever recomputed.
    """

    def __init__(self, net: Network, core: int | None = None, keep_core: bool = True):
        self.net = net
        n = net.n
        self.adj: dict[int, dict[int, float]] = {}
        self.members: set[int] = set()
        self.sources: set[int] = set()
        self.core = core if keep_core else None
        self.in_tree = np.zeros(n, dtype=bool)
        self.degree = np.zeros(n, dtype=np.int64)
        self.td = np.zeros((n, n))
        if core is not None:
            self._add_root(core)

    # --- structure -------------------------------------------------------

    @property
    def nodes(self) -> set[int]:
        return set(self.adj)

    def node_array(self) -> np.ndarray:
        return np.flatnonzero(self.in_tree)

    def __contains__(self, v: int) -> bool:
        return v in self.adj

    def __len__(self) -> int:
        return len(self.adj)

    def edges(self) -> set[tuple[int, int, float]]:
        return {(u, v, w) for u, nbrs in self.adj.items() for v, w in nbrs.items() if u < v}

    def edge_pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset((u, v) for u, nbrs in self.adj.items() for v in nbrs if u < v)

    def link_count(self) -> int:
        return int(self.degree.sum()) // 2

    def leaves(self) -> list[int]:
        if len(self.adj) == 1:
            return list(self.adj)
        return [int(v) for v in np.flatnonzero(self.in_tree & (self.degree == 1))]

    def leaf_mask(self) -> np.ndarray:
        if len(self.adj) == 1:
            return self.in_tree.copy()
        return self.in_tree & (self.degree == 1)

    def is_anchor(self, v: int) -> bool:
        return v in self.members or v in self.sources or v == self.core

    def _add_root(self, v: int) -> None:
        self.adj[v] = {}
        self.in_tree[v] = True
        self.td[v, v] = 0.0

    def _attach(self, x: int, parent: int) -> None:
        w = self.net.weight(x, parent)
        idx = self.in_tree
        row = self.td[parent, idx] + w
        self.td[x, idx] = row
        self.td[idx, x] = row
        self.td[x, x] = 0.0
        self.adj[x] = {parent: w}
        self.adj[parent][x] = w
        self.in_tree[x] = True
        self.degree[x] += 1
        self.degree[parent] += 1

    def _detach(self, x: int) -> int | None:
        nbrs = self.adj.pop(x)
        self.in_tree[x] = False
        self.degree[x] = 0
        for y in nbrs:
            del self.adj[y][x]
            self.degree[y] -= 1
        return next(iter(nbrs), None)

    # --- membership ------------------------------------------------------

    def graft(self, path: list[int], member: bool = True, source: bool = False) -> int:
        """Add ``path`` (joining node first) up to its first on-tree node.

        Returns the number of links added. On an empty tree the joining node
        simply becomes the root.
        """
        v = path[0]
        if not self.adj:
            self._add_root(v)
            added = 0
        else:
            k = next((i for i, x in enumerate(path) if x in self.adj), None)
            if k is None:
                raise PathDetached(f"no node of path {path} is on the tree")
            for i in range(k - 1, -1, -1):
                self._attach(path[i], path[i + 1])
            added = k
        if member:
            self.members.add(v)
        if source:
            self.sources.add(v)
        return added

    def leave(self, v: int) -> "MulticastTree":
        """Drop ``v``'s membership (and source role), then prune the dead chain."""
        if v not in self.members:
            raise NotAMember(v)
        self.members.discard(v)
        self.sources.discard(v)
        self.prune_from(v)
        return self

    def prune_from(self, v: int) -> None:
        x: int | None = v
        while x is not None and x in self.adj and len(self.adj[x]) <= 1 and not self.is_anchor(x):
            x = self._detach(x)

    # --- distances -------------------------------------------------------

    def tree_distance(self, u: int, v: int) -> float:
        for x in (u, v):
            if x not in self.adj:
                raise NotInTree(x)
        return float(self.td[u, v])

    def tree_diameter(self) -> tuple[float, tuple[int, int]]:
        """Longest leaf-to-leaf tree path by double sweep.

        Sweep from the lowest-numbered node to its farthest node ``p``, then
        from ``p`` to its farthest node ``q``; ties go to the lower id.
        """
        if not self.adj:
            raise ValueError("empty tree")
        idx = self.node_array()
        start = int(idx[0])
        p = int(idx[np.argmax(self.td[start, idx])])
        q = int(idx[np.argmax(self.td[p, idx])])
        return float(self.td[p, q]), (min(p, q), max(p, q))

    # --- checks & dumps --------------------------------------------------

    def check_invariants(self) -> None:
        nodes = set(self.adj)
        n_edges = sum(len(nb) for nb in self.adj.values()) // 2
        if nodes:
            if n_edges != len(nodes) - 1:
                raise TreeInvariantError(f"{n_edges} links on {len(nodes)} nodes")
            start = next(iter(nodes))
            seen = {start}
            stack = [start]
            while stack:
                for y in self.adj[stack.pop()]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if seen != nodes:
                raise TreeInvariantError("tree is disconnected")
        anchors = self.members | self.sources
        if not anchors <= nodes:
            raise TreeInvariantError(f"off-tree members/sources {sorted(anchors - nodes)}")
        if self.core is not None and nodes and self.core not in nodes:
            raise TreeInvariantError("core left the tree")
        if len(nodes) > 1:
            bad = [v for v in nodes if len(self.adj[v]) == 1 and not self.is_anchor(v)]
            if bad:
                raise TreeInvariantError(f"non-member leaves {sorted(bad)}")
        for u, v, w in self.edges():
            if not self.net.has_edge(u, v) or self.net.weight(u, v) != w:
                raise TreeInvariantError(f"link {u}-{v} does not match the network")
        if not np.array_equal(np.flatnonzero(self.in_tree), np.array(sorted(nodes), dtype=np.int64)):
            raise TreeInvariantError("node mask out of sync")

    def dumps(self) -> str:
        lines = ["tree"]
        for v in sorted(self.adj):
            tags = [t for t, on in (("member", v in self.members), ("source", v in self.sources),
                                    ("core", v == self.core)) if on]
            lines.append(" ".join(["node", str(v), *tags]))
        lines += [f"edge {u} {v} {w:.9f}" for u, v, w in sorted(self.edges())]
        return "\n".join(lines) + "\n"


def init_tree(net: Network, core: int, sources=(), keep_core: bool = True) -> MulticastTree:
    """Single-node tree on ``core``. Remaining sources are joined by the caller."""
    sources = set(sources)
    if sources and core not in sources:
        raise ValueError("core must be one of the sources")
    tree = MulticastTree(net, core=core, keep_core=True)
    if core in sources:
        tree.sources.add(core)
    if not keep_core:
        tree.core = None
    return tree
