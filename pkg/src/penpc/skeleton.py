"""Skeleton pruning by conditional independence tests, and CPDAG orientation.

``modified_pc_stable`` starts from an estimated Gaussian graphical model and
only conditions on sets of the form ``A \\ Gamma`` where ``A`` is the union of
the two endpoint neighbourhoods and ``Gamma`` runs over subsets of the
vertices that may be shared descendants. ``pc_stable`` is the usual
order-independent PC skeleton search from the complete graph.
"""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from itertools import combinations

from .citest import (INDEPENDENT, CorrelationMatrix, InsufficientSampleError,
                     ci_test)
from .graph import Cpdag, UndirectedGraph, _canon

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateSets:
    A: frozenset
    B: frozenset
    C: frozenset


class SepSetMap(Mapping):
    """Separating set for every vertex pair missing from a skeleton.

    Pairs listed in ``complement_pairs`` are separated by all remaining
    vertices; they are stored implicitly so large graphs stay cheap.
    """

    def __init__(self, p: int, sets=None, complement_pairs=()):
        self.p = p
        self._sets = {}
        for pair, s in (sets or {}).items():
            self[pair] = s
        self._complement = {_canon(*pr) for pr in complement_pairs}
        self._complement -= set(self._sets)
        self.n_tests = 0
        self.n_skipped = 0

    def __setitem__(self, pair, s):
        a, b = _canon(*pair)
        s = frozenset(int(v) for v in s)
        if a in s or b in s:
            raise ValueError(f"separating set of {a},{b} contains an endpoint")
        if not all(0 <= v < self.p for v in s):
            raise ValueError(f"separating set {sorted(s)} has unknown vertices")
        self._sets[(a, b)] = s

    def __getitem__(self, pair):
        key = _canon(*pair)
        if key in self._sets:
            return self._sets[key]
        if key in self._complement:
            return frozenset(range(self.p)) - set(key)
        raise KeyError(pair)

    def is_complement(self, pair) -> bool:
        return _canon(*pair) in self._complement

    def __contains__(self, pair):
        try:
            key = _canon(*pair)
        except TypeError:
            return False
        return key in self._sets or key in self._complement

    def __iter__(self):
        return iter(sorted(set(self._sets) | self._complement))

    def __len__(self):
        return len(self._sets) + len(self._complement)

    def relabel(self, perm) -> "SepSetMap":
        out = SepSetMap(self.p)
        for (a, b), s in self._sets.items():
            out[(perm[a], perm[b])] = {perm[v] for v in s}
        out._complement = {_canon(perm[a], perm[b]) for a, b in self._complement}
        return out


# --------------------------------------------------------------------------
# candidate conditioning sets


def _candidate(adj, i, j):
    A = (adj[i] | adj[j]) - {i, j}
    B = (adj[i] & adj[j]) - {i, j}
    # vertices reachable from B once i and j are removed
    seen = set(B)
    stack = list(B)
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u != i and u != j and u not in seen:
                seen.add(u)
                stack.append(u)
    return A, B, A & seen


def candidate_sets(g: UndirectedGraph, i: int, j: int) -> CandidateSets:
    if i == j:
        raise ValueError("i and j must differ")
    A, B, C = _candidate(g.adjacency_sets(), i, j)
    return CandidateSets(frozenset(A), frozenset(B), frozenset(C))


def candidate_conditioning_sets(cs: CandidateSets, level: int):
    """All ``A \\ Gamma`` with ``Gamma`` a size-``level`` subset of ``C``, lexicographic."""
    if level < 0:
        raise ValueError("level must be nonnegative")
    A = cs.A
    return [frozenset(A - set(g)) for g in combinations(sorted(cs.C), level)]


# --------------------------------------------------------------------------
# skeleton searches


def _independent(R, n, i, j, K, alpha, seps):
    """One CI test; a test the sample size cannot support counts as skipped."""
    try:
        seps.n_tests += 1
        return ci_test(R, n, i, j, sorted(K), alpha) == INDEPENDENT
    except InsufficientSampleError:
        seps.n_tests -= 1
        seps.n_skipped += 1
        return False


def _edges(adj):
    return sorted((a, b) for a in range(len(adj)) for b in adj[a] if a < b)


def modified_pc_stable(ggm: UndirectedGraph, R: CorrelationMatrix, n: int | None = None,
                       alpha: float = 0.01, max_level: int | None = None):
    """Prune an estimated GGM down to a DAG skeleton.

    Returns ``(skeleton, sepsets)``. Within a level every candidate set is
    computed from a frozen copy of the graph, so the result does not depend
    on the order edges are visited.
    """
    p = ggm.p
    if R.p != p:
        raise ValueError("graph and correlation matrix disagree on p")
    if n is None:
        n = R.n
    adj = ggm.adjacency_sets()
    seps = SepSetMap(p, complement_pairs=[(a, b) for a in range(p) for b in range(a + 1, p)
                                          if b not in adj[a]])

    for i, j in _edges(adj):
        if _independent(R, n, i, j, (), alpha, seps):
            adj[i].discard(j)
            adj[j].discard(i)
            seps[(i, j)] = ()

    level = 0
    while True:
        snap = [set(s) for s in adj]
        for i, j in _edges(snap):
            A, _, C = _candidate(snap, i, j)
            if len(C) < level:
                continue
            if n is not None and len(A) - level > n - 4:
                # every set at this level is too large to test
                seps.n_skipped += math.comb(len(C), level)
                continue
            for gamma in combinations(sorted(C), level):
                K = A.difference(gamma)
                if _independent(R, n, i, j, K, alpha, seps):
                    adj[i].discard(j)
                    adj[j].discard(i)
                    seps[(i, j)] = K
                    break
        if max_level is not None and level >= max_level:
            break
        if not any(len(_candidate(adj, i, j)[2]) > level for i, j in _edges(adj)):
            break
        level += 1

    return UndirectedGraph(p, frozenset(_edges(adj))), seps


def pc_stable(R: CorrelationMatrix, n: int | None = None, p: int | None = None,
              alpha: float = 0.01, max_level: int | None = None):
    """Order-independent PC skeleton search from the complete graph."""
    p = R.p if p is None else p
    if R.p != p:
        raise ValueError("p does not match the correlation matrix")
    if n is None:
        n = R.n
    if max_level is None:
        max_level = max(p - 2, 0)
    adj = [set(range(p)) - {v} for v in range(p)]
    seps = SepSetMap(p)

    level = 0
    while level <= max_level and (n is None or level <= n - 4):
        snap = [set(s) for s in adj]
        for i, j in _edges(snap):
            done = False
            for a, b in ((i, j), (j, i)):
                cand = sorted(snap[a] - {b})
                if len(cand) < level:
                    continue
                for K in combinations(cand, level):
                    if _independent(R, n, i, j, K, alpha, seps):
                        adj[i].discard(j)
                        adj[j].discard(i)
                        seps[(i, j)] = K
                        done = True
                        break
                if done:
                    break
        level += 1
        if not any(len(adj[a]) - 1 >= level for a in range(p)):
            break

    return UndirectedGraph(p, frozenset(_edges(adj))), seps


# --------------------------------------------------------------------------
# orientation


def orient_cpdag(skel: UndirectedGraph, seps: Mapping) -> Cpdag:
    """Orient v-structures, then apply the three propagation rules to a fixed point."""
    p = skel.p
    adj = skel.adjacency_sets()
    diagnostics = []

    heads = set()
    for i in range(p):
        for j in range(i + 1, p):
            if j in adj[i]:
                continue
            common = adj[i] & adj[j]
            if not common:
                continue
            if (i, j) not in seps:
                raise KeyError(f"no separating set for nonadjacent pair {i},{j}")
            S = seps[(i, j)]
            for k in sorted(common):
                if k not in S:
                    heads.add((i, k))
                    heads.add((j, k))

    directed = set()
    frozen = set()
    for a, b in sorted(heads):
        if (b, a) in heads:
            if a < b:
                frozen.add((a, b))
                diagnostics.append(f"conflicting orientation on {a}-{b}; left undirected")
                log.info("conflicting orientation on %d-%d", a, b)
            continue
        directed.add((a, b))
    undirected = {e for e in skel.edges if (e[0], e[1]) not in directed and (e[1], e[0]) not in directed}

    def und(a, b):
        return _canon(a, b) in undirected

    def open_(a, b):
        return und(a, b) and _canon(a, b) not in frozen

    def orient(a, b):
        undirected.discard(_canon(a, b))
        directed.add((a, b))

    changed = True
    while changed:
        changed = False
        for a, b in sorted(undirected - frozen):
            for x, y in ((a, b), (b, a)):
                if not open_(x, y):
                    break
                # rule 1: w -> x - y, w and y nonadjacent
                if any((w, x) in directed and w != y and w not in adj[y] for w in adj[x]):
                    orient(x, y)
                    changed = True
                    break
                # rule 2: x -> k -> y
                if any((x, k) in directed and (k, y) in directed for k in adj[x] & adj[y]):
                    orient(x, y)
                    changed = True
                    break
                # rule 3: x - k1 -> y and x - k2 -> y with k1, k2 nonadjacent
                ks = [k for k in adj[x] & adj[y] if und(x, k) and (k, y) in directed]
                if any(k2 not in adj[k1] for k1, k2 in combinations(ks, 2)):
                    orient(x, y)
                    changed = True
                    break

    return Cpdag(p, frozenset(directed), frozenset(undirected), tuple(diagnostics))


# --------------------------------------------------------------------------
# files


def write_sepsets(seps: SepSetMap, path, compact: bool = False) -> None:
    """CSV ``i,j,sep`` with ``sep`` semicolon-joined; ``compact`` writes ``*`` for complements."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["i", "j", "sep"])
        for a, b in seps:
            if compact and seps.is_complement((a, b)):
                w.writerow([a, b, "*"])
            else:
                w.writerow([a, b, ";".join(str(v) for v in sorted(seps[(a, b)]))])


def read_sepsets(path, p: int) -> SepSetMap:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or [h.strip() for h in rows[0]] != ["i", "j", "sep"]:
        raise ValueError(f"{path}: expected header i,j,sep")
    out = SepSetMap(p)
    comp = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValueError(f"{path}:{lineno}: expected three columns")
        a, b = int(row[0]), int(row[1])
        if not (0 <= a < p and 0 <= b < p) or a == b:
            raise ValueError(f"{path}:{lineno}: bad vertex pair {a},{b}")
        sep = row[2].strip()
        if sep == "*":
            comp.append((a, b))
            continue
        out[(a, b)] = [int(v) for v in sep.split(";")] if sep else []
    out._complement = {_canon(*pr) for pr in comp} - set(out._sets)
    return out


def write_cpdag(g: Cpdag, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["from", "to", "type"])
        rows = [(a, b, "directed") for a, b in g.directed_edges]
        rows += [(a, b, "undirected") for a, b in g.undirected_edges]
        w.writerows(sorted(rows))


def read_cpdag(path, p: int) -> Cpdag:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or [h.strip() for h in rows[0]] != ["from", "to", "type"]:
        raise ValueError(f"{path}: expected header from,to,type")
    d, u = set(), set()
    for row in rows[1:]:
        if not row:
            continue
        a, b, kind = int(row[0]), int(row[1]), row[2].strip()
        if kind == "directed":
            d.add((a, b))
        elif kind == "undirected":
            u.add((a, b))
        else:
            raise ValueError(f"{path}: unknown edge type {kind!r}")
    return Cpdag(p, frozenset(d), frozenset(u))
