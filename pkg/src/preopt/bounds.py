"""Lower and upper bounds on constrained preordering optima.

Lower bounds come from local search (greedy arc insertion and greedy arc
fixation) and always carry a feasible witness. Upper bounds combine the
induced values of exclusion/inclusion for arcs incident to a pair with an
edge-disjoint triple-packing bound for the rest, or are exact in the
tractable special case where the sign-greedy relation is itself feasible.
Boundary bounds cap how much value the boundary of a subset can lose when a
tau map replants the subset's interior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .flow import FlowNetwork, min_st_cut
from .instance import Instance, evaluate
from .maps import TAU_BOTH, TAU_IN, TAU_OUT, MapSpec, change_sets, tau_loose_sets
from .relations import (
    InconsistentAssignmentError,
    PartialAssignment,
    Relation,
    close,
    reach_or_equal,
)

Pair = tuple[int, int]


@dataclass
class BoundReport:
    """Bounds produced while deciding one fixation, with their provenance."""

    lb: float
    ub: float
    ub_prime: float | None = None
    provenance: str = ""


def arc_max_values(instance: Instance, pa: PartialAssignment) -> np.ndarray:
    """Per-arc maximum contribution over all completions: c+ where undecided,
    the pinned contribution where decided."""
    m = np.where(pa.ones, instance.values, np.where(pa.zeros, 0.0, instance.c_plus))
    np.fill_diagonal(m, 0.0)
    return m


# the seven 0/1 assignments of a triple's arcs (pq, qr, pr) that satisfy
# x_pq + x_qr - x_pr <= 1
_TRIPLE_COMBOS = np.array(
    [
        (0, 0, 0),
        (0, 0, 1),
        (0, 1, 0),
        (0, 1, 1),
        (1, 0, 0),
        (1, 0, 1),
        (1, 1, 1),
    ],
    dtype=np.float64,
)


def _triple_table(
    instance: Instance, pa: PartialAssignment, pool: list[int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All ordered triples over pool with their termwise sums and true maxima
    under the single triangle constraint plus the pinned pairs."""
    k = len(pool)
    if k < 3:
        return np.empty((0, 3), dtype=np.int64), np.empty(0), np.empty(0)
    arr = np.array(pool, dtype=np.int64)
    p, q, r = np.meshgrid(arr, arr, arr, indexing="ij")
    mask = (p != q) & (q != r) & (p != r)
    triples = np.stack([p[mask], q[mask], r[mask]], axis=1)

    arcs = np.stack(
        [triples[:, [0, 1]], triples[:, [1, 2]], triples[:, [0, 2]]], axis=1
    )  # (m, 3, 2)
    c = instance.values
    vals = c[arcs[:, :, 0], arcs[:, :, 1]]  # (m, 3)
    state = np.full(vals.shape, -1, dtype=np.int8)
    state[pa.ones[arcs[:, :, 0], arcs[:, :, 1]]] = 1
    state[pa.zeros[arcs[:, :, 0], arcs[:, :, 1]]] = 0

    feasible = (
        (state[:, None, :] == -1) | (state[:, None, :] == _TRIPLE_COMBOS[None, :, :])
    ).all(axis=2)  # (m, 7)
    scores = vals @ _TRIPLE_COMBOS.T  # (m, 7)
    scores = np.where(feasible, scores, -np.inf)
    tri_max = scores.max(axis=1)

    m_vals = arc_max_values(instance, pa)
    tri_sum = m_vals[arcs[:, :, 0], arcs[:, :, 1]].sum(axis=1)
    return triples, tri_sum, tri_max


def _greedy_select(
    triples: np.ndarray, improvement: np.ndarray
) -> list[int]:
    """Greedy edge-disjoint selection by descending improvement, lexicographic
    tie-break; only strictly improving triples are taken."""
    order = sorted(
        (k for k in range(triples.shape[0]) if improvement[k] > 0.0),
        key=lambda k: (-improvement[k], tuple(triples[k])),
    )
    used: set[Pair] = set()
    chosen: list[int] = []
    for k in order:
        p, q, r = (int(v) for v in triples[k])
        arcs = ((p, q), (q, r), (p, r))
        if any(e in used for e in arcs):
            continue
        used.update(arcs)
        chosen.append(k)
    return chosen


class TriplePackingBound:
    """Reusable triple-packing upper bound with fast per-pair exclusion.

    Builds one packing for the whole element pool; ``bound_excluding(i, j)``
    then bounds the optimum of the sub-problem on pool minus {i, j} without
    recomputing the packing (a packing restricted to fewer elements is still
    edge-disjoint, so the bound stays valid).
    """

    def __init__(self, instance: Instance, pa: PartialAssignment, elements=None):
        n = instance.n
        self.pool = sorted(range(n) if elements is None else elements)
        pool_mask = np.zeros(n, dtype=bool)
        pool_mask[self.pool] = True
        self.m_vals = arc_max_values(instance, pa)

        triples, tri_sum, tri_max = _triple_table(instance, pa, self.pool)
        chosen = _greedy_select(triples, tri_sum - tri_max)
        self.triples = [tuple(int(v) for v in triples[k]) for k in chosen]
        self.tri_max = [float(tri_max[k]) for k in chosen]

        covered = np.zeros((n, n), dtype=bool)
        for p, q, r in self.triples:
            covered[p, q] = covered[q, r] = covered[p, r] = True
        self.covered = covered

        eligible = np.outer(pool_mask, pool_mask)
        np.fill_diagonal(eligible, False)
        self._uncovered = eligible & ~covered
        self._uncovered_total = float(self.m_vals[self._uncovered].sum())
        self._incident = self.m_vals * self._uncovered
        self._tri_max_total = float(sum(self.tri_max))
        self._touching: dict[int, list[int]] = {p: [] for p in self.pool}
        for k, t in enumerate(self.triples):
            for p in set(t):
                self._touching[p].append(k)

    def bound(self) -> float:
        """Upper bound on the optimum over the full pool."""
        return self._uncovered_total + self._tri_max_total

    def bound_excluding(self, i: int, j: int) -> float:
        """Upper bound on the optimum over pool minus {i, j}."""
        part = self._uncovered_total
        part -= float(self._incident[i].sum() + self._incident[:, i].sum())
        part -= float(self._incident[j].sum() + self._incident[:, j].sum())
        # arcs between i and j were subtracted twice
        part += float(self._incident[i, j] + self._incident[j, i])

        tri_part = self._tri_max_total
        for k in set(self._touching[i]) | set(self._touching[j]):
            tri_part -= self.tri_max[k]
            p, q, r = self.triples[k]
            for a, b in ((p, q), (q, r), (p, r)):
                if a not in (i, j) and b not in (i, j):
                    tri_part += float(self.m_vals[a, b])
        return part + tri_part


def triple_packing_upper_bound(
    instance: Instance, pa: PartialAssignment, excluded=()
) -> float:
    """Upper bound on the optimum over all elements outside ``excluded``."""
    pool = [p for p in range(instance.n) if p not in set(excluded)]
    return TriplePackingBound(instance, pa, elements=pool).bound()


def induced_value(instance: Instance, pa: PartialAssignment, i: int, j: int, b: int) -> float:
    """Upper bound on the total value of arcs incident to {i, j} over all
    completions with x_ij = b.

    b = 0 is the induced value of exclusion, b = 1 the induced value of
    inclusion. Each term maximizes one or two incident arcs subject to the
    pinned pairs and the triangle coupling that x_ij = b imposes on them.
    """
    if pa.value(i, j) is not None:
        raise ValueError("pair ij must be undecided")
    c = instance.values

    def dmax(p: int, q: int) -> float:
        v = pa.value(p, q)
        if v is None:
            return max(float(c[p, q]), 0.0)
        return float(c[p, q]) if v == 1 else 0.0

    def pair_max(e1: Pair, e2: Pair, allowed) -> float:
        v1, v2 = pa.value(*e1), pa.value(*e2)
        best = None
        for a1 in (0, 1):
            if v1 is not None and a1 != v1:
                continue
            for a2 in (0, 1):
                if v2 is not None and a2 != v2:
                    continue
                if not allowed(a1, a2):
                    continue
                val = float(c[e1]) * a1 + float(c[e2]) * a2
                if best is None or val > best:
                    best = val
        if best is None:
            raise InconsistentAssignmentError(
                f"no joint assignment for arcs {e1}, {e2} under x_{i}{j}={b}"
            )
        return best

    total = dmax(j, i)
    if b == 0:
        for w in range(instance.n):
            if w in (i, j):
                continue
            # x_iw + x_wj <= 1 once x_ij = 0
            total += pair_max((i, w), (w, j), lambda a1, a2: a1 + a2 <= 1)
            total += dmax(w, i) + dmax(j, w)
    else:
        total += float(c[i, j])
        for w in range(instance.n):
            if w in (i, j):
                continue
            # x_ij = 1 forces x_jw <= x_iw and x_wi <= x_wj
            total += pair_max((j, w), (i, w), lambda a1, a2: a1 <= a2)
            total += pair_max((w, i), (w, j), lambda a1, a2: a1 <= a2)
    return total


def _greedy_insertion(instance: Instance, base: PartialAssignment) -> np.ndarray:
    """Greedy arc insertion from the closed base; returns a ones matrix.

    Repeatedly inserts the arc whose join (arc plus transitive consequences)
    gains the most value, while never touching an assigned-zero pair; stops
    when no insertion gains more than the tolerance.
    """
    c = instance.values
    tol = instance.tolerance
    n = instance.n
    offdiag = ~np.eye(n, dtype=bool)
    ones = base.ones.copy()
    zeros = base.zeros
    zeros_f = zeros.astype(np.float64)
    while True:
        aug = ones.copy()
        np.fill_diagonal(aug, True)
        aug_f = aug.astype(np.float64)
        gain_new = c * (~ones & offdiag)
        gains = aug_f.T @ gain_new @ aug_f.T
        violations = (aug_f.T @ zeros_f @ aug_f.T) > 0.5
        allowed = ~ones & ~zeros & offdiag & ~violations
        gains = np.where(allowed, gains, -np.inf)
        best = int(np.argmax(gains))
        a, b = divmod(best, n)
        if gains[a, b] <= tol:
            break
        new = np.outer(aug[:, a], aug[b]) & offdiag
        ones |= new
    return ones


def _greedy_fixation(instance: Instance, base: PartialAssignment) -> np.ndarray:
    """Greedy arc fixation: decide arcs in descending |c| toward their sign,
    falling back to the opposite value when that would be inconsistent."""
    c = instance.values
    n = instance.n
    offdiag = ~np.eye(n, dtype=bool)
    ones = base.ones.copy()
    zeros = base.zeros.copy()
    reach = reach_or_equal(ones)
    decided = ones | zeros
    order = sorted(
        ((p, q) for p in range(n) for q in range(n) if p != q),
        key=lambda e: (-abs(c[e]), e),
    )
    for p, q in order:
        if decided[p, q]:
            continue
        prefer_one = c[p, q] >= 0
        gained_ones = np.outer(reach[:, p], reach[q]) & offdiag
        if prefer_one and not (gained_ones & zeros).any():
            ones |= gained_ones
            reach |= np.outer(reach[:, p], reach[q])
            decided |= gained_ones
        else:
            # setting pq to zero is always consistent here: a p->q path would
            # have decided the pair already (the base ones-set is closed)
            gained_zeros = np.outer(reach[p], reach[:, q]) & offdiag
            zeros |= gained_zeros
            decided |= gained_zeros
    return ones


def local_search_lower_bound(
    instance: Instance,
    pa: PartialAssignment,
    constraint: tuple[Pair, int] | None = None,
    *,
    greedy: bool = True,
) -> tuple[float, Relation]:
    """Feasible witness and its value; a lower bound on the constrained optimum.

    The witness completes pa and satisfies the optional (pair, value)
    constraint. With greedy=True the better of greedy arc insertion and
    greedy arc fixation is returned; with greedy=False the minimal witness
    (the closure's one-arcs, everything else zero) is returned.
    """
    if constraint is not None:
        (p, q), v = constraint
        pinned = pa.value(p, q)
        if pinned is not None and pinned != v:
            raise InconsistentAssignmentError("constraint contradicts the assignment")
        base = close(pa.with_assignments([(p, q, v)]))
    else:
        base = close(pa)
    candidates = [Relation(base.ones)]
    if greedy:
        candidates.append(Relation(_greedy_insertion(instance, base)))
        candidates.append(Relation(_greedy_fixation(instance, base)))
    best_value = -math.inf
    witness = candidates[0]
    for x in candidates:
        value = evaluate(instance, x)
        if value > best_value:
            best_value = value
            witness = x
    return best_value, witness


def exact_bounds_tractable(
    instance: Instance, pa: PartialAssignment, pair: Pair
) -> tuple[float, float] | None:
    """Exact constrained optima in the tractable special case, else None.

    Requires c_ij >= 0 and pair undecided. When the sign-greedy completion
    (ones where undecided and c >= 0) is itself transitive, it maximizes the
    unconstrained problem and the x_ij = 1 branch; the x_ij = 0 branch then
    reduces to one minimum i-j cut over positive parts, with assigned-one
    arcs uncuttable. Returns (optimum with x_ij = 1, optimum with x_ij = 0);
    the latter is -inf when no completion has x_ij = 0.
    """
    i, j = pair
    if pa.value(i, j) is not None:
        raise ValueError("pair ij must be undecided")
    c = instance.values
    if c[i, j] < 0:
        raise ValueError("tractable bounds require c_ij >= 0")
    n = instance.n
    offdiag = ~np.eye(n, dtype=bool)
    undecided = ~pa.decided & offdiag
    x_plus = pa.ones | (undecided & (c >= 0))
    if not Relation(x_plus).is_transitive():
        return None
    opt = float(c[x_plus].sum())

    arcs = []
    for p, q in np.argwhere(offdiag):
        p, q = int(p), int(q)
        if pa.ones[p, q]:
            arcs.append((p, q, math.inf))
        elif not pa.zeros[p, q] and c[p, q] > 0.0:
            arcs.append((p, q, float(c[p, q])))
    value, _ = min_st_cut(FlowNetwork(n, tuple(arcs), i, j))
    if math.isinf(value):
        return opt, -math.inf
    return opt, opt - value


def sign_greedy_relation(instance: Instance, pa: PartialAssignment) -> Relation:
    """The candidate maximizer: one where undecided with c >= 0, pins elsewhere."""
    offdiag = ~np.eye(instance.n, dtype=bool)
    undecided = ~pa.decided & offdiag
    return Relation(pa.ones | (undecided & (instance.values >= 0)), copy=False)


def boundary_bound(
    instance: Instance,
    pa: PartialAssignment,
    subset,
    variant: str,
    y: Relation | None = None,
    *,
    exact: bool = False,
) -> float:
    """Upper bound on the boundary value a tau map can lose.

    For every completion x, the boundary terms satisfy
    sum_{pq in boundary} c_pq (x_pq - tau(x)_pq) <= this bound. The general
    form needs no y (it uses the y-free flip supersets); the exact form uses
    the planted relation's sharp sets and requires y.
    """
    if variant not in (TAU_OUT, TAU_IN, TAU_BOTH):
        raise ValueError(f"unknown tau variant {variant!r}")
    if exact:
        if y is None:
            raise ValueError("exact boundary bound needs the planted relation y")
        sets = change_sets(MapSpec.tau(variant, subset, y), pa)
        p01, p10 = sets.p01, sets.p10
    else:
        p01, p10 = tau_loose_sets(variant, frozenset(subset), pa)
    return float(instance.c_minus[p01].sum() + instance.c_plus[p10].sum())
