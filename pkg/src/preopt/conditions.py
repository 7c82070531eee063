"""Partial-optimality deciders and the joint fixpoint pipeline.

Every decider consumes an instance and a closed consistent partial
assignment and emits fixations that provably keep at least one optimal
solution reachable. Cut-type batches are justified against one snapshot
(adding zeros never invalidates a pending cut fixation); join- and
fixation-type deciders re-verify and apply each fixation against the
evolving assignment, because single-variable persistency statements do not
compose from a common snapshot.

Condition inequalities only fire when they hold by more than the instance
tolerance, so float noise can never turn a tie into an unsound fixation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .bounds import (
    BoundReport,
    TriplePackingBound,
    boundary_bound,
    exact_bounds_tractable,
    induced_value,
    local_search_lower_bound,
    sign_greedy_relation,
)
from .energy import alpha_beta_swap_minimize, build_join_energy, IN_U, IN_U_PRIME
from .flow import FlowNetwork, min_st_cut, reachability_sets
from .instance import Instance
from .maps import TAU_BOTH, TAU_IN, TAU_OUT, MapSpec, is_true_to, tau_trueness_loose
from .relations import (
    InconsistentAssignmentError,
    PartialAssignment,
    Relation,
    close,
    merge_classes,
    mutual_one_classes,
)

Pair = tuple[int, int]

DIRECTED_CUT = "directed-cut"
EDGE_CUT = "edge-cut"
BBK_STRONG_ZERO = "bbk-strong-0"
BBK_STRONG_ONE = "bbk-strong-1"
BBK_WEAK = "bbk-weak"
EDGE_JOIN = "edge-join"
SUBSET_FIX = "subset-u"

#: cut conditions first (cheapest and most effective), join conditions on the
#: partial optimality the cuts established, then the subset fixation condition
DEFAULT_CONDITIONS = (
    DIRECTED_CUT,
    EDGE_CUT,
    BBK_STRONG_ZERO,
    EDGE_JOIN,
    BBK_STRONG_ONE,
    SUBSET_FIX,
)

ALL_CONDITIONS = DEFAULT_CONDITIONS + (BBK_WEAK,)


class SoundnessError(RuntimeError):
    """A condition produced fixations with no common transitive completion.

    This cannot happen if every decider is sound; it aborts the run instead
    of being silently repaired.
    """


@dataclass(frozen=True)
class Fixation:
    """One fixed variable: the pair, its value, and the deciding condition."""

    pair: Pair
    value: int
    condition: str
    margin: float


@dataclass(frozen=True)
class PipelineConfig:
    """Which conditions run, in which order, and their parameters."""

    conditions: tuple[str, ...] = DEFAULT_CONDITIONS
    max_rounds: int | None = None  # None: iterate until no condition fixes a pair
    single_pass: bool = False
    candidate_reuse: bool = True
    swap_sweeps: int = 20
    subset_neighbors: int = 4
    greedy_lb: bool = True
    merge: bool = True

    def __post_init__(self):
        for cond in self.conditions:
            if cond not in ALL_CONDITIONS:
                raise ValueError(f"unknown condition id {cond!r}")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")


def _undecided_pairs(pa: PartialAssignment) -> list[Pair]:
    mask = ~pa.decided
    np.fill_diagonal(mask, False)
    return [(int(p), int(q)) for p, q in np.argwhere(mask)]


def directed_cut_condition(instance: Instance, pa: PartialAssignment) -> list[Fixation]:
    """Fix to zero every arc leaving a reachable set of the auxiliary digraph.

    The digraph keeps positive arcs and assigned-one arcs (minus assigned
    zeros); arcs leaving any node's reachable set are nonpositive and free of
    assigned ones, so cutting all of them is improving. Like all cut
    conditions, only pairs below minus the tolerance are fixed (ties at zero
    are sound but useless and float-fragile).
    """
    c = instance.values
    n = instance.n
    adjacency = ((c > 0.0) | pa.ones) & ~pa.zeros
    np.fill_diagonal(adjacency, False)
    reach = reachability_sets(adjacency)
    candidate = np.zeros((n, n), dtype=bool)
    for u in range(n):
        candidate |= np.outer(reach[u], ~reach[u])
    candidate &= ~pa.zeros & (c < -instance.tolerance)
    np.fill_diagonal(candidate, False)
    if (candidate & pa.ones).any():
        raise SoundnessError("directed cut crossed an assigned-one arc")
    return [
        Fixation((int(p), int(q)), 0, DIRECTED_CUT, float(-c[p, q]))
        for p, q in np.argwhere(candidate)
    ]


def _cut_network_arcs(instance: Instance, pa: PartialAssignment) -> tuple:
    """Shared arc list for all per-pair minimum-cut problems: assigned ones
    are uncuttable, assigned zeros free, everything else costs its positive part."""
    arcs = []
    c = instance.values
    for p, q in np.argwhere(~np.eye(instance.n, dtype=bool)):
        p, q = int(p), int(q)
        if pa.ones[p, q]:
            arcs.append((p, q, math.inf))
        elif not pa.zeros[p, q] and c[p, q] > 0.0:
            arcs.append((p, q, float(c[p, q])))
    return tuple(arcs)


def edge_cut_condition(
    instance: Instance, pa: PartialAssignment, *, candidate_reuse: bool = True
) -> list[Fixation]:
    """Fix x_ij = 0 whenever the cheapest dicut through ij costs at most c_ij-.

    One minimum i-j cut per candidate pair; with candidate reuse each solved
    cut is tested against every pair it separates, which saves most of the
    remaining max-flow calls without changing the fixation set.
    """
    c = instance.values
    tol = instance.tolerance
    arcs = _cut_network_arcs(instance, pa)
    fixed = np.zeros((instance.n, instance.n), dtype=bool)
    fixations: list[Fixation] = []
    targets = [(i, j) for i, j in _undecided_pairs(pa) if c[i, j] < -tol]
    for i, j in targets:
        if fixed[i, j]:
            continue
        value, side = min_st_cut(FlowNetwork(instance.n, arcs, i, j))
        if math.isinf(value):
            continue
        if candidate_reuse:
            candidates = [
                (p, q)
                for p, q in targets
                if p in side and q not in side and not fixed[p, q]
            ]
        else:
            candidates = [(i, j)]
        for p, q in candidates:
            margin = float(-c[p, q]) - value
            if margin >= tol:
                fixed[p, q] = True
                fixations.append(Fixation((p, q), 0, EDGE_CUT, margin))
    return fixations


def edge_join_condition(
    instance: Instance, pa: PartialAssignment, *, max_sweeps: int = 20
) -> list[Fixation]:
    """Fix x_ij = 1 when some subset pair makes the join map improving.

    For each undecided pair with positive value, the cheapest right-hand side
    over subset pairs (U, U') is minimized heuristically by alpha-beta swaps
    on the three-label energy model; the fixation is emitted only after an
    explicit trueness re-check of the composed map. Fixations apply
    immediately, so later pairs are judged against the updated assignment.
    """
    c = instance.values
    tol = instance.tolerance
    working = pa
    fixations: list[Fixation] = []
    for i, j in _undecided_pairs(pa):
        if c[i, j] <= tol or working.value(i, j) is not None:
            continue
        model = build_join_energy(instance, working, i, j)
        labeling, energy = alpha_beta_swap_minimize(model, max_sweeps=max_sweeps)
        margin = float(c[i, j]) - energy
        if margin < tol:
            continue
        subset = frozenset(int(p) for p in np.flatnonzero(labeling == IN_U))
        subset_prime = frozenset(int(p) for p in np.flatnonzero(labeling == IN_U_PRIME))
        spec = MapSpec.gamma(subset, subset_prime, i, j)
        if not is_true_to(spec, working):
            continue
        working = close(working.with_assignments([(i, j, 1)]))
        fixations.append(Fixation((i, j), 1, EDGE_JOIN, margin))
    return fixations


def _upper_bound_constrained(
    instance: Instance,
    pa: PartialAssignment,
    packing: TriplePackingBound,
    i: int,
    j: int,
    b: int,
) -> float:
    """Upper bound on the optimum over completions with x_ij = b: induced
    value of the incident arcs plus the packing bound on the rest."""
    return induced_value(instance, pa, i, j, b) + packing.bound_excluding(i, j)


def boecker_conditions(
    instance: Instance,
    pa: PartialAssignment,
    strong: bool = True,
    bs: tuple[int, ...] = (0, 1),
    *,
    greedy: bool = True,
) -> list[Fixation]:
    """Bound-comparison conditions fixing pairs to either value.

    Strong: one unconstrained lower bound against per-pair constrained upper
    bounds, strict inequality. Weak: per-pair constrained lower bounds with a
    non-strict comparison, applied sequentially against the evolving
    assignment. When the sign-greedy relation is feasible, its exact values
    replace the heuristic bounds for pairs with nonnegative value.
    """
    c = instance.values
    tol = instance.tolerance
    packing = TriplePackingBound(instance, pa)
    tractable = sign_greedy_relation(instance, pa).is_transitive()
    fixations: list[Fixation] = []

    if strong:
        lb, _ = local_search_lower_bound(instance, pa, greedy=greedy)
        condition_by_b = {0: BBK_STRONG_ZERO, 1: BBK_STRONG_ONE}
        for i, j in _undecided_pairs(pa):
            for b in bs:
                pair_lb = lb
                if b == 1 and tractable and c[i, j] >= 0.0:
                    exact = exact_bounds_tractable(instance, pa, (i, j))
                    opt_one, opt_zero = exact
                    pair_lb = max(pair_lb, opt_one)
                    ub = opt_zero
                else:
                    ub = _upper_bound_constrained(instance, pa, packing, i, j, 1 - b)
                margin = pair_lb - ub
                if margin >= tol:
                    fixations.append(Fixation((i, j), b, condition_by_b[b], margin))
                    break
        return fixations

    working = pa
    for i, j in _undecided_pairs(pa):
        if working.value(i, j) is not None:
            continue
        for b in bs:
            if b == 1 and tractable and c[i, j] >= 0.0:
                exact = exact_bounds_tractable(instance, working, (i, j))
                if exact is not None:
                    lb, ub = exact
                else:
                    lb, _ = local_search_lower_bound(instance, working, ((i, j), b), greedy=greedy)
                    ub = _upper_bound_constrained(instance, working, packing, i, j, 1 - b)
            else:
                lb, _ = local_search_lower_bound(instance, working, ((i, j), b), greedy=greedy)
                ub = _upper_bound_constrained(instance, working, packing, i, j, 1 - b)
            margin = lb - ub
            if margin >= tol:
                working = close(working.with_assignments([(i, j, b)]))
                fixations.append(Fixation((i, j), b, BBK_WEAK, margin))
                break
    return fixations


def subset_fixation_condition(
    instance: Instance,
    pa: PartialAssignment,
    pair: Pair,
    b: int,
    subset,
    variant: str = TAU_BOTH,
    *,
    exact: bool = True,
    greedy: bool = True,
) -> tuple[Fixation | None, BoundReport]:
    """Decide one pair with the subset-maximizer condition.

    Bounds the constrained optima of the sub-problem on the subset (exactly
    in the tractable case, else by local search and induced-value plus
    packing bounds), bounds the boundary loss of the matching tau map, and
    fixes x_ij = b when lb - ub beats the boundary bound and the map is true
    to the assignment.
    """
    i, j = pair
    elements = sorted(set(int(p) for p in subset))
    if i not in elements or j not in elements:
        raise ValueError("pair must lie inside the subset")
    if pa.value(i, j) is not None:
        raise InconsistentAssignmentError("pair already decided")
    tol = instance.tolerance
    sub_instance = instance.restrict(elements)
    sub_pa = pa.restrict(elements)
    si, sj = elements.index(i), elements.index(j)

    exact_used = False
    if exact and b == 1 and instance.values[i, j] >= 0.0:
        result = exact_bounds_tractable(sub_instance, sub_pa, (si, sj))
        if result is not None:
            lb, ub = result
            y_sub = sign_greedy_relation(sub_instance, sub_pa)
            y_full = np.zeros((instance.n, instance.n), dtype=bool)
            y_full[np.ix_(elements, elements)] = y_sub.matrix
            y = Relation(y_full, copy=False)
            ub_prime = boundary_bound(instance, pa, elements, variant, y, exact=True)
            true = is_true_to(MapSpec.tau(variant, elements, y), pa)
            exact_used = True
    if not exact_used:
        lb, _ = local_search_lower_bound(sub_instance, sub_pa, ((si, sj), b), greedy=greedy)
        packing = TriplePackingBound(sub_instance, sub_pa)
        ub = _upper_bound_constrained(sub_instance, sub_pa, packing, si, sj, 1 - b)
        ub_prime = boundary_bound(instance, pa, elements, variant, exact=False)
        true = tau_trueness_loose(variant, frozenset(elements), pa)

    report = BoundReport(
        lb=lb, ub=ub, ub_prime=ub_prime,
        provenance="tractable-exact" if exact_used else "local-search+packing",
    )
    margin = lb - ub - ub_prime
    if true and margin >= tol:
        return Fixation(pair, b, SUBSET_FIX, margin), report
    return None, report


def _neighbor_subset(instance: Instance, i: int, j: int, k: int) -> list[int]:
    """The pair plus the k elements with the largest value mass to or from it."""
    c = np.abs(instance.values)
    mass = c[i] + c[:, i] + c[j] + c[:, j]
    mass[i] = mass[j] = -1.0
    order = sorted(range(instance.n), key=lambda p: (-mass[p], p))
    return sorted([i, j] + order[:k])


def subset_fixation_pass(
    instance: Instance,
    pa: PartialAssignment,
    *,
    neighbors: int = 4,
    greedy: bool = True,
) -> list[Fixation]:
    """Run the subset condition over all undecided positive pairs.

    Candidate subsets are the pair plus its strongest neighbors; all three
    tau variants are tried. Fixations apply immediately.
    """
    tol = instance.tolerance
    working = pa
    fixations: list[Fixation] = []
    for i, j in _undecided_pairs(pa):
        if instance.values[i, j] <= tol or working.value(i, j) is not None:
            continue
        subset = _neighbor_subset(instance, i, j, neighbors)
        for variant in (TAU_BOTH, TAU_OUT, TAU_IN):
            fix, _ = subset_fixation_condition(
                instance, working, (i, j), 1, subset, variant, greedy=greedy
            )
            if fix is not None:
                working = close(working.with_assignments([(i, j, 1)]))
                fixations.append(fix)
                break
    return fixations


@dataclass
class ConditionStats:
    fixed_zero: int = 0
    fixed_one: int = 0
    time_ns: int = 0


@dataclass
class RunStats:
    """Aggregate outcome of a joint pipeline run."""

    n: int
    pair_count: int
    rounds: int = 0
    merged_classes: int = 0
    fixed_zero: int = 0
    fixed_one: int = 0
    percent_fixed: float = 0.0
    total_ns: int = 0
    per_condition: dict[str, ConditionStats] = field(default_factory=dict)


def _dispatch(cond: str, instance: Instance, pa: PartialAssignment, cfg: PipelineConfig):
    if cond == DIRECTED_CUT:
        return directed_cut_condition(instance, pa)
    if cond == EDGE_CUT:
        return edge_cut_condition(instance, pa, candidate_reuse=cfg.candidate_reuse)
    if cond == BBK_STRONG_ZERO:
        return boecker_conditions(instance, pa, strong=True, bs=(0,), greedy=cfg.greedy_lb)
    if cond == BBK_STRONG_ONE:
        return boecker_conditions(instance, pa, strong=True, bs=(1,), greedy=cfg.greedy_lb)
    if cond == BBK_WEAK:
        return boecker_conditions(instance, pa, strong=False, greedy=cfg.greedy_lb)
    if cond == EDGE_JOIN:
        return edge_join_condition(instance, pa, max_sweeps=cfg.swap_sweeps)
    if cond == SUBSET_FIX:
        return subset_fixation_pass(
            instance, pa, neighbors=cfg.subset_neighbors, greedy=cfg.greedy_lb
        )
    raise ValueError(f"unknown condition id {cond!r}")


def _lift_assignment(
    pa: PartialAssignment, groups: list[list[int]], orig_n: int
) -> PartialAssignment:
    """Expand a contracted assignment back to original element indices."""
    member = np.zeros((pa.n, orig_n), dtype=bool)
    for cur, members in enumerate(groups):
        member[cur, members] = True
    ones = member.T.astype(np.int32) @ pa.ones.astype(np.int32) @ member.astype(np.int32) > 0
    zeros = member.T.astype(np.int32) @ pa.zeros.astype(np.int32) @ member.astype(np.int32) > 0
    for members in groups:
        if len(members) > 1:
            block = np.zeros(orig_n, dtype=bool)
            block[members] = True
            ones |= np.outer(block, block)
    np.fill_diagonal(ones, False)
    np.fill_diagonal(zeros, False)
    return PartialAssignment(ones, zeros, copy=False)


def run_joint(
    instance: Instance, cfg: PipelineConfig | None = None
) -> tuple[PartialAssignment, list[Fixation], RunStats]:
    """Iterate the configured conditions to a fixpoint and lift the result.

    Fixed mutual-one classes are contracted as soon as they appear; the
    returned assignment is expressed on the original elements, with every
    fixation expanded to the original pairs it pins. Aborts with
    SoundnessError if a batch of fixations has no common completion.
    """
    if cfg is None:
        cfg = PipelineConfig()
    start = time.perf_counter_ns()
    orig_n = instance.n
    pair_count = orig_n * (orig_n - 1)
    stats = RunStats(n=orig_n, pair_count=pair_count)
    stats.per_condition = {cond: ConditionStats() for cond in cfg.conditions}

    groups: list[list[int]] = [[p] for p in range(orig_n)]
    current = instance
    pa = PartialAssignment.empty(orig_n)
    all_fixations: list[Fixation] = []
    limit = cfg.max_rounds if cfg.max_rounds is not None else max(1, pair_count)

    for _ in range(1 if cfg.single_pass else limit):
        stats.rounds += 1
        round_added = 0
        for cond in cfg.conditions:
            if current.n <= 1:
                break
            tick = time.perf_counter_ns()
            fixations = _dispatch(cond, current, pa, cfg)
            if fixations:
                try:
                    new_pa = close(
                        pa.with_assignments([(f.pair[0], f.pair[1], f.value) for f in fixations])
                    )
                except InconsistentAssignmentError as exc:
                    raise SoundnessError(
                        f"condition {cond!r} emitted fixations with no common completion"
                    ) from exc
                round_added += new_pa.num_decided() - pa.num_decided()
                pa = new_pa
                record = stats.per_condition[cond]
                for f in fixations:
                    p, q = f.pair
                    weight = len(groups[p]) * len(groups[q])
                    if f.value == 0:
                        record.fixed_zero += weight
                    else:
                        record.fixed_one += weight
                    for op in groups[p]:
                        for oq in groups[q]:
                            all_fixations.append(replace(f, pair=(op, oq)))
                if cfg.merge:
                    classes = mutual_one_classes(pa)
                    while classes:
                        current, pa, _, old_to_new = merge_classes(current, pa, classes[0])
                        stats.merged_classes += 1
                        regrouped: list[list[int]] = [[] for _ in range(current.n)]
                        for old_el, members in enumerate(groups):
                            regrouped[int(old_to_new[old_el])].extend(members)
                        groups = regrouped
                        classes = mutual_one_classes(pa)
            stats.per_condition[cond].time_ns += time.perf_counter_ns() - tick
        if round_added == 0 or current.n <= 1:
            break

    lifted = _lift_assignment(pa, groups, orig_n)
    stats.fixed_zero = int(lifted.zeros.sum())
    stats.fixed_one = int(lifted.ones.sum())
    stats.percent_fixed = (
        100.0 * lifted.num_decided() / pair_count if pair_count else 100.0
    )
    stats.total_ns = time.perf_counter_ns() - start
    return lifted, all_fixations, stats
