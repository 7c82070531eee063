"""Max-flow/min-cut, reachability and triple packing substrates.

The min s-t cut solver is a push-relabel implementation with highest-label
selection, the gap heuristic and periodic global relabeling; the condition
deciders solve O(n^2) cut problems per instance, so these heuristics matter.
Infinite capacities are represented by a sentinel equal to the sum of all
finite capacities plus one, which can never be part of a finite minimum cut.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

Arc = tuple[int, int, float]


@dataclass(frozen=True)
class FlowNetwork:
    """Directed capacitated graph with a source and a sink.

    Capacities must be nonnegative; math.inf marks uncuttable arcs. The arc
    list may be shared between networks that differ only in source/sink.
    """

    n: int
    arcs: tuple[Arc, ...]
    source: int
    sink: int

    def __post_init__(self):
        if not (0 <= self.source < self.n and 0 <= self.sink < self.n):
            raise ValueError("source/sink out of range")
        if self.source == self.sink:
            raise ValueError("source and sink must differ")
        for u, v, cap in self.arcs:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"arc ({u}, {v}) out of range")
            if cap < 0 or math.isnan(cap):
                raise ValueError(f"arc ({u}, {v}) has invalid capacity {cap}")


def min_st_cut(net: FlowNetwork) -> tuple[float, set[int]]:
    """Minimum s-t cut value and the source side of one minimum cut.

    Returns (value, U) with source in U and sink not in U; the value equals
    the maximum flow. If every s-t cut crosses an infinite arc the value is
    math.inf and U is the residual-reachable set of the source.
    """
    n, s, t = net.n, net.source, net.sink
    finite_total = sum(cap for _, _, cap in net.arcs if not math.isinf(cap))
    sentinel = finite_total + 1.0

    arc_to: list[int] = []
    arc_cap: list[float] = []
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v, cap in net.arcs:
        if u == v or cap == 0.0:
            continue
        c = sentinel if math.isinf(cap) else cap
        adj[u].append(len(arc_to))
        arc_to.append(v)
        arc_cap.append(c)
        adj[v].append(len(arc_to))
        arc_to.append(u)
        arc_cap.append(0.0)

    hmax = 2 * n
    height = [0] * n
    excess = [0.0] * n
    cur = [0] * n
    buckets: list[list[int]] = [[] for _ in range(hmax + 2)]
    cnt = [0] * (hmax + 2)
    highest = 0

    def activate(v: int) -> None:
        nonlocal highest
        if v not in (s, t) and excess[v] > 0.0:
            buckets[height[v]].append(v)
            if height[v] > highest:
                highest = height[v]

    def rebuild_buckets() -> None:
        nonlocal highest
        for b in buckets:
            b.clear()
        for h in range(len(cnt)):
            cnt[h] = 0
        for v in range(n):
            cnt[height[v]] += 1
        highest = 0
        for v in range(n):
            activate(v)

    def global_relabel() -> None:
        unset = hmax + 1
        h = [unset] * n
        h[s] = n
        h[t] = 0
        queue = deque([t])
        while queue:
            v = queue.popleft()
            for a in adj[v]:
                w = arc_to[a]
                if h[w] == unset and arc_cap[a ^ 1] > 0.0:
                    h[w] = h[v] + 1
                    queue.append(w)
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for a in adj[v]:
                w = arc_to[a]
                if h[w] == unset and arc_cap[a ^ 1] > 0.0:
                    h[w] = h[v] + 1
                    queue.append(w)
        for v in range(n):
            height[v] = h[v] if h[v] != unset else hmax
        rebuild_buckets()

    # saturate the source's out-arcs, then discharge by highest label
    height[s] = n
    for a in adj[s]:
        d = arc_cap[a]
        if d > 0.0:
            arc_cap[a] = 0.0
            arc_cap[a ^ 1] += d
            excess[arc_to[a]] += d
            excess[s] -= d
    global_relabel()

    relabels = 0
    while True:
        while highest >= 0 and not buckets[highest]:
            highest -= 1
        if highest < 0:
            break
        v = buckets[highest].pop()
        if v in (s, t) or excess[v] <= 0.0:
            continue
        if height[v] != highest:
            activate(v)
            continue
        need_global = False
        while excess[v] > 0.0:
            if cur[v] == len(adj[v]):
                old = height[v]
                new_h = hmax + 1
                for a in adj[v]:
                    if arc_cap[a] > 0.0 and height[arc_to[a]] + 1 < new_h:
                        new_h = height[arc_to[a]] + 1
                if new_h > hmax:
                    height[v] = hmax
                    break
                cnt[old] -= 1
                height[v] = new_h
                cnt[new_h] += 1
                cur[v] = 0
                if cnt[old] == 0 and old < n:
                    # gap: nodes stranded above the hole can never reach t
                    for w in range(n):
                        if old < height[w] < n:
                            cnt[height[w]] -= 1
                            height[w] = n + 1
                            cnt[n + 1] += 1
                relabels += 1
                if relabels >= n:
                    relabels = 0
                    need_global = True
                    break
            else:
                a = adj[v][cur[v]]
                w = arc_to[a]
                if arc_cap[a] > 0.0 and height[v] == height[w] + 1:
                    d = min(excess[v], arc_cap[a])
                    arc_cap[a] -= d
                    arc_cap[a ^ 1] += d
                    excess[v] -= d
                    had = excess[w]
                    excess[w] += d
                    if had <= 0.0:
                        activate(w)
                else:
                    cur[v] += 1
        if need_global:
            global_relabel()
        else:
            activate(v)

    value = excess[t]
    reachable = {s}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        for a in adj[v]:
            w = arc_to[a]
            if w not in reachable and arc_cap[a] > 0.0:
                reachable.add(w)
                queue.append(w)
    if value > finite_total + 0.5:
        return math.inf, reachable
    return value, reachable


def reachability_sets(adjacency: np.ndarray) -> np.ndarray:
    """Per-node reachable sets of a digraph, via breadth-first search.

    Row u of the returned boolean matrix marks every node with a u->q path,
    including u itself.
    """
    adj = np.asarray(adjacency, dtype=bool)
    n = adj.shape[0]
    succ = [np.flatnonzero(adj[u]).tolist() for u in range(n)]
    reach = np.eye(n, dtype=bool)
    for u in range(n):
        row = reach[u]
        queue = deque([u])
        while queue:
            v = queue.popleft()
            for w in succ[v]:
                if not row[w]:
                    row[w] = True
                    queue.append(w)
    return reach


Triple = tuple[int, int, int]


def triple_arcs(t: Triple) -> tuple[tuple[int, int], ...]:
    """The three arcs pq, qr, pr a triple contributes to the objective."""
    p, q, r = t
    return ((p, q), (q, r), (p, r))


@dataclass
class TriplePacking:
    """An edge-disjoint set of triples."""

    triples: list[Triple] = field(default_factory=list)

    def __post_init__(self):
        seen: set[tuple[int, int]] = set()
        for t in self.triples:
            for e in triple_arcs(t):
                if e in seen:
                    raise ValueError(f"packing is not edge-disjoint at arc {e}")
                seen.add(e)

    def covered_arcs(self) -> set[tuple[int, int]]:
        return {e for t in self.triples for e in triple_arcs(t)}


def greedy_triple_packing(n: int, weight, elements=None) -> TriplePacking:
    """Maximal edge-disjoint packing, greedily by descending weight.

    Only triples with strictly positive weight are taken; ties break
    lexicographically on (p, q, r). ``elements`` restricts the ground set.
    """
    pool = list(range(n)) if elements is None else sorted(elements)
    scored: list[tuple[float, Triple]] = []
    for p in pool:
        for q in pool:
            if q == p:
                continue
            for r in pool:
                if r == p or r == q:
                    continue
                w = weight(p, q, r)
                if w > 0.0:
                    scored.append((w, (p, q, r)))
    scored.sort(key=lambda item: (-item[0], item[1]))
    used: set[tuple[int, int]] = set()
    chosen: list[Triple] = []
    for _, t in scored:
        arcs = triple_arcs(t)
        if any(e in used for e in arcs):
            continue
        used.update(arcs)
        chosen.append(t)
    return TriplePacking(chosen)
