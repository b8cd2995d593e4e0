"""Graph containers, random DAG generators and structural oracles."""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np


class CycleError(ValueError):
    pass


def _canon(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def topological_order(p: int, edges: Iterable[tuple[int, int]]) -> list[int] | None:
    """Kahn ordering of a directed edge set; ``None`` when a cycle exists.

    Ties are broken by smallest vertex index so the order is deterministic.
    """
    import heapq

    children = [[] for _ in range(p)]
    indeg = [0] * p
    for a, b in edges:
        children[a].append(b)
        indeg[b] += 1
    heap = [v for v in range(p) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    return order if len(order) == p else None


def is_acyclic(p: int, edges: Iterable[tuple[int, int]]) -> bool:
    return topological_order(p, edges) is not None


@dataclass(frozen=True)
class DirectedGraph:
    """A DAG on vertices ``0..p-1``; edges are (parent, child) pairs."""

    p: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"vertex count must be positive, got {self.p}")
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (0 <= a < self.p and 0 <= b < self.p):
                raise ValueError(f"edge {a}->{b} outside 0..{self.p - 1}")
        order = topological_order(self.p, edges)
        if order is None:
            raise CycleError("edge set contains a directed cycle")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_order", tuple(order))

    def topological_order(self) -> list[int]:
        return list(self._order)

    def parents(self, v: int) -> set[int]:
        return {a for a, b in self.edges if b == v}

    def children(self, v: int) -> set[int]:
        return {b for a, b in self.edges if a == v}

    def parent_lists(self) -> list[list[int]]:
        pa = [[] for _ in range(self.p)]
        for a, b in sorted(self.edges):
            pa[b].append(a)
        return pa

    def descendants(self, v: int) -> set[int]:
        ch = self.children_lists()
        seen, stack = set(), [v]
        while stack:
            for c in ch[stack.pop()]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen

    def children_lists(self) -> list[list[int]]:
        ch = [[] for _ in range(self.p)]
        for a, b in sorted(self.edges):
            ch[a].append(b)
        return ch

    def relabel(self, perm) -> "DirectedGraph":
        """Vertex ``v`` becomes ``perm[v]``."""
        return DirectedGraph(self.p, frozenset((perm[a], perm[b]) for a, b in self.edges))

    def __len__(self):
        return len(self.edges)


@dataclass(frozen=True)
class UndirectedGraph:
    """Undirected simple graph; each edge is stored once as ``(min, max)``."""

    p: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"vertex count must be positive, got {self.p}")
        canon = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (0 <= a < self.p and 0 <= b < self.p):
                raise ValueError(f"edge {a}-{b} outside 0..{self.p - 1}")
            canon.add(_canon(a, b))
        object.__setattr__(self, "edges", frozenset(canon))

    @classmethod
    def complete(cls, p: int) -> "UndirectedGraph":
        return cls(p, frozenset((a, b) for a in range(p) for b in range(a + 1, p)))

    @classmethod
    def from_adjacency(cls, adj) -> "UndirectedGraph":
        adj = np.asarray(adj)
        p = adj.shape[0]
        return cls(p, frozenset((a, b) for a in range(p) for b in range(a + 1, p)
                                if adj[a, b] or adj[b, a]))

    def adjacency_sets(self) -> list[set[int]]:
        adj = [set() for _ in range(self.p)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def has_edge(self, a: int, b: int) -> bool:
        return _canon(a, b) in self.edges

    def relabel(self, perm) -> "UndirectedGraph":
        return UndirectedGraph(self.p, frozenset((perm[a], perm[b]) for a, b in self.edges))

    def __len__(self):
        return len(self.edges)


@dataclass(frozen=True)
class Cpdag:
    """Partially directed graph left after orientation."""

    p: int
    directed_edges: frozenset
    undirected_edges: frozenset
    diagnostics: tuple = ()

    def __post_init__(self):
        directed = frozenset((int(a), int(b)) for a, b in self.directed_edges)
        undirected = frozenset(_canon(int(a), int(b)) for a, b in self.undirected_edges)
        for a, b in directed | undirected:
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
        if {_canon(a, b) for a, b in directed} & undirected:
            raise ValueError("a vertex pair is both directed and undirected")
        object.__setattr__(self, "directed_edges", directed)
        object.__setattr__(self, "undirected_edges", undirected)


# --------------------------------------------------------------------------
# generators


def gen_er_dag(p: int, p_e: float, rng: np.random.Generator) -> DirectedGraph:
    """Erdos-Renyi DAG: each forward pair ``i < j`` gets ``i -> j`` w.p. ``p_e``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if not 0.0 <= p_e <= 1.0:
        raise ValueError("p_e must lie in [0, 1]")
    iu, ju = np.triu_indices(p, k=1)
    keep = rng.random(iu.size) < p_e
    return DirectedGraph(p, frozenset(zip(iu[keep].tolist(), ju[keep].tolist())))


def gen_ba_dag(p: int, e: int, rng: np.random.Generator) -> DirectedGraph:
    """Barabasi-Albert DAG grown one vertex at a time.

    Each new vertex proposes ``e`` edges towards existing vertices, picked
    with probability proportional to their current degree. Proposals are
    drawn independently and duplicates collapse. While every existing
    degree is zero the target is uniform.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if e < 1:
        raise ValueError("e must be >= 1")
    degree = np.zeros(p, dtype=np.int64)
    edges = set()
    for new in range(1, p):
        w = degree[:new].astype(float)
        total = w.sum()
        probs = w / total if total > 0 else np.full(new, 1.0 / new)
        targets = set(rng.choice(new, size=e, replace=True, p=probs).tolist())
        for t in targets:
            edges.add((new, t))
            degree[t] += 1
        degree[new] += len(targets)
    return DirectedGraph(p, frozenset(edges))


# --------------------------------------------------------------------------
# structural oracles


def skeleton_of(g: DirectedGraph) -> UndirectedGraph:
    return UndirectedGraph(g.p, frozenset(g.edges))


def true_ggm_of(g: DirectedGraph) -> UndirectedGraph:
    """Skeleton plus co-parent (moral) edges."""
    edges = set(_canon(a, b) for a, b in g.edges)
    for pa in g.parent_lists():
        for x in range(len(pa)):
            for y in range(x + 1, len(pa)):
                edges.add(_canon(pa[x], pa[y]))
    return UndirectedGraph(g.p, frozenset(edges))


def d_separated(g: DirectedGraph, i: int, j: int, K: Iterable[int]) -> bool:
    """Whether ``K`` d-separates ``i`` and ``j`` (reachability, Bayes-ball style)."""
    K = set(K)
    if i == j:
        raise ValueError("i and j must differ")
    if i in K or j in K:
        raise ValueError("i and j must not belong to the conditioning set")
    pa = g.parent_lists()
    ch = g.children_lists()

    # vertices that are in K or have a descendant in K
    anc_k = set()
    stack = list(K)
    while stack:
        v = stack.pop()
        if v in anc_k:
            continue
        anc_k.add(v)
        stack.extend(pa[v])

    # state: (vertex, arrived_from_child) ; from_child=True means we came up an edge
    seen = set()
    queue = deque([(i, True)])
    while queue:
        v, up = queue.popleft()
        if (v, up) in seen:
            continue
        seen.add((v, up))
        if v == j:
            return False
        if up:
            # arrived from a child (or start): chain can continue through v unless v in K
            if v not in K:
                for u in pa[v]:
                    queue.append((u, True))
                for c in ch[v]:
                    queue.append((c, False))
        else:
            # arrived from a parent: v is non-collider towards children, collider towards parents
            if v not in K:
                for c in ch[v]:
                    queue.append((c, False))
            if v in anc_k:
                for u in pa[v]:
                    queue.append((u, True))
    return True


def connected_to_set(g: UndirectedGraph, exclude: Iterable[int], seed: Iterable[int]) -> set[int]:
    """Vertices reachable from ``seed`` once the ``exclude`` vertices are removed."""
    exclude = set(exclude)
    seed = set(seed)
    if seed & exclude:
        raise ValueError("seed set overlaps the excluded vertices")
    adj = g.adjacency_sets()
    seen = set(seed)
    stack = list(seed)
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in exclude and u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


# --------------------------------------------------------------------------
# edge-list files


def write_directed(g: DirectedGraph, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["from", "to"])
        w.writerows(sorted(g.edges))


def write_undirected(g: UndirectedGraph, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["a", "b"])
        w.writerows(sorted(g.edges))


def _read_pairs(path, header):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or [h.strip() for h in rows[0]] != header:
        raise ValueError(f"{path}: expected header {','.join(header)}")
    pairs = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ValueError(f"{path}:{lineno}: expected two columns")
        pairs.append((int(row[0]), int(row[1])))
    return pairs


def read_directed(path, p: int | None = None) -> DirectedGraph:
    pairs = _read_pairs(path, ["from", "to"])
    if p is None:
        p = 1 + max((max(e) for e in pairs), default=0)
    return DirectedGraph(p, frozenset(pairs))


def read_undirected(path, p: int | None = None) -> UndirectedGraph:
    pairs = _read_pairs(path, ["a", "b"])
    if p is None:
        p = 1 + max((max(e) for e in pairs), default=0)
    return UndirectedGraph(p, frozenset(pairs))
