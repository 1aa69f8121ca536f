"""Set-selection strategies for minimising F under a cardinality constraint.

Element choices break ties by the smallest node label and set choices by the
lexicographically smallest set, so every strategy is deterministic.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations, islice
from math import comb
from typing import List, Optional, Sequence, Tuple

from sinkopt.errors import NoStarters, StarterTooLarge, TargetTooSmall, TooLarge, ZeroGreedyRank
from sinkopt.hitting import objective_for
from sinkopt.network import EMPTY_SET, Graph, NodeSet
from sinkopt.rank import TIE_TOL, RankContext, RankedSet
from sinkopt.utils import parallel_map

logger = logging.getLogger(__name__)

ORACLE_LIMIT = 10**7
GREEDY_RATIO = 1.0 - 1.0 / math.e

_ORACLE_CHUNK = 4096


@dataclass(frozen=True)
class Step:
    """One move of a selection strategy and the objective value after it."""

    F: float
    added: Optional[int] = None
    removed: Optional[int] = None


@dataclass(frozen=True)
class Selection:
    """A selected set with the chain of moves that produced it.

    Attributes:
        nodes: The final set.
        F: Objective value of ``nodes``.
        start: The set the strategy started from.
        steps: Moves in order.
        method: Name of the strategy.
    """

    nodes: NodeSet
    F: float
    start: NodeSet
    steps: Tuple[Step, ...]
    method: str


def _better(value: float, best: float) -> bool:
    return value < best - TIE_TOL * max(1.0, abs(best))


def _argmin(values: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(values)):
        if _better(values[i], values[best]):
            best = i
    return best


def _grow(g: Graph, nodes: NodeSet, k: int, method: str) -> Selection:
    objective = objective_for(g)
    start = nodes
    steps: List[Step] = []
    value = objective(nodes) if nodes else math.inf
    while len(nodes) < k:
        options = [v for v in range(g.N) if v not in nodes]
        values = objective.evaluate(nodes.with_node(v) for v in options)
        best = _argmin(values)
        nodes, value = nodes.with_node(options[best]), values[best]
        steps.append(Step(F=value, added=options[best]))
    return Selection(nodes=nodes, F=value, start=start, steps=tuple(steps), method=method)


def greedy(g: Graph, k: int) -> Selection:
    """Add, k times, the node whose addition gives the smallest F."""
    if not 1 <= k <= g.N:
        raise ValueError(f"K must lie in [1, {g.N}], got {k}")
    return _grow(g, EMPTY_SET, k, "greedy")


def greedy_extend(g: Graph, s0: NodeSet, k: int) -> Selection:
    """Grow ``s0`` greedily to ``k`` nodes; ``s0`` is returned as is when |s0| = k.

    Raises:
        StarterTooLarge: ``s0`` already has more than ``k`` nodes.
    """
    if len(s0) > k:
        raise StarterTooLarge(
            f"starter of size {len(s0)} exceeds K={k}", starter=list(s0.members), K=k
        )
    if k > g.N:
        raise ValueError(f"K must not exceed {g.N}, got {k}")
    return _grow(g, s0, k, "starter")


@dataclass(frozen=True)
class StarterSolution:
    """The offered set S* and every starter extension it was chosen from."""

    offered: Selection
    extensions: Tuple[Selection, ...]


def best_selection(selections: Sequence[Selection]) -> Selection:
    """Return the selection with the smallest F, ties to the smallest set."""
    ordered = sorted(selections, key=lambda s: s.nodes)
    return ordered[_argmin([s.F for s in ordered])]


def solve_starter(
    g: Graph, starters: Sequence[NodeSet], k: int, threads: int = 1
) -> StarterSolution:
    """Extend every starter to ``k`` nodes and offer the best extension.

    Raises:
        NoStarters: ``starters`` is empty.
        StarterTooLarge: A starter has more than ``k`` nodes.
    """
    if not starters:
        raise NoStarters("no starter sets to extend")
    for s in starters:
        if len(s) > k:
            raise StarterTooLarge(
                f"starter of size {len(s)} exceeds K={k}", starter=list(s.members), K=k
            )
    extensions = parallel_map(lambda s: greedy_extend(g, s, k), list(starters), threads)
    return StarterSolution(offered=best_selection(extensions), extensions=tuple(extensions))


def backward_greedy(g: Graph, t: NodeSet, k: int) -> Selection:
    """Delete, until ``k`` nodes remain, the node whose removal gives the smallest F.

    Raises:
        TargetTooSmall: ``t`` has at most ``k`` nodes.
    """
    if len(t) <= k:
        raise TargetTooSmall(f"set of size {len(t)} cannot shrink to K={k}", size=len(t), K=k)
    if k < 1:
        raise ValueError("K must be at least 1")
    objective = objective_for(g)
    nodes = t
    steps: List[Step] = []
    value = objective(t)
    while len(nodes) > k:
        options = list(nodes)
        values = objective.evaluate(nodes.without_node(v) for v in options)
        best = _argmin(values)
        nodes, value = nodes.without_node(options[best]), values[best]
        steps.append(Step(F=value, removed=options[best]))
    return Selection(nodes=nodes, F=value, start=t, steps=tuple(steps), method="backward")


def brute_force_oracle(g: Graph, k: int, threads: int = 1, limit: int = ORACLE_LIMIT) -> Selection:
    """Return the exact minimiser of F over all k-node sets.

    Raises:
        TooLarge: There are more than ``limit`` candidate sets.
    """
    if not 1 <= k <= g.N:
        raise ValueError(f"K must lie in [1, {g.N}], got {k}")
    total = comb(g.N, k)
    if total > limit:
        raise TooLarge(f"{total} sets of size {k} exceed the limit of {limit}", sets=total, limit=limit)
    objective = objective_for(g)
    best_nodes, best_value = EMPTY_SET, math.inf
    sets = (NodeSet(c) for c in combinations(range(g.N), k))
    while chunk := list(islice(sets, _ORACLE_CHUNK)):
        values = objective.evaluate(chunk, threads)
        i = _argmin(values)
        if _better(values[i], best_value):
            best_nodes, best_value = chunk[i], values[i]
    return Selection(nodes=best_nodes, F=best_value, start=EMPTY_SET, steps=(), method="oracle")


def swap_refine(
    g: Graph, selection: Selection, threads: int = 1, pool: Optional[NodeSet] = None
) -> Selection:
    """Apply the best strictly improving single-node exchange until none is left.

    With ``pool``, only nodes of ``pool`` may be swapped in, which exchanges the
    selection towards another set.
    """
    allowed = range(g.N) if pool is None else list(pool)
    objective = objective_for(g)
    nodes, value = selection.nodes, selection.F
    steps = list(selection.steps)
    while True:
        swaps = sorted(
            (nodes.without_node(u).with_node(v), u, v)
            for u in nodes
            for v in allowed
            if v not in nodes
        )
        if not swaps:
            break
        values = objective.evaluate([s for s, _, _ in swaps], threads)
        best = _argmin(values)
        if not _better(values[best], value):
            break
        nodes, u, v = swaps[best]
        value = values[best]
        steps.append(Step(F=value, added=v, removed=u))
        logger.debug("swap %d -> %d improves F to %.12g", u, v, value)
    return Selection(
        nodes=nodes, F=value, start=selection.start, steps=tuple(steps), method=selection.method
    )


@dataclass(frozen=True)
class BoundChecks:
    """Which of the approximation guarantees were checked and whether they held.

    A value of None means the check did not apply to this run.
    """

    lemma2_precondition: bool
    lemma2: bool
    corollary1: Optional[bool] = None
    nemhauser: Optional[bool] = None
    prop2: Optional[bool] = None
    oracle_dominance: Optional[bool] = None
    offered_in_family: Optional[bool] = None


@dataclass(frozen=True)
class OptimizationReport:
    """Everything known about one solve at target cardinality K.

    Attributes:
        K: Target cardinality.
        offered: The offered set S*.
        greedy: The classic greedy set S_g.
        greedy_trace: The greedy selection with its per-step F values.
        starters: The starter collection that was extended.
        extensions: The extension of every starter.
        greedy_prefix: The greedy set after m steps, if m is known.
        oracle: The exact optimum, when computed.
        backward: The backward-greedy set from the reference cover, when computed.
        chi: Improvement factor with rho(S*) = (1 + chi) rho(S_g).
        greedy_ratio: (F(S_g) - F({a})) / (F(O*) - F({a})) for the greedy first node a.
        refined: Whether the exchange post-pass changed S*.
        exchanged: Whether exchanging towards the backward-greedy set changed S*.
        offered_in_family: Whether S* belongs to L(nu, C).
        checks: Guarantee checks from :func:`compare`.
    """

    K: int
    offered: RankedSet
    greedy: RankedSet
    greedy_trace: Selection
    starters: Tuple[NodeSet, ...] = ()
    extensions: Tuple[Selection, ...] = ()
    greedy_prefix: Optional[NodeSet] = None
    oracle: Optional[RankedSet] = None
    backward: Optional[RankedSet] = None
    chi: Optional[float] = None
    greedy_ratio: Optional[float] = None
    refined: bool = False
    exchanged: bool = False
    offered_in_family: Optional[bool] = None
    checks: Optional[BoundChecks] = None


@dataclass(frozen=True)
class Comparison:
    """Improvement factor and guarantee checks for a report."""

    chi: Optional[float]
    greedy_ratio: Optional[float]
    checks: BoundChecks


def improvement_factor(rho_offered: float, rho_greedy: float) -> float:
    """Return chi = rho(S*) / rho(S_g) - 1.

    Raises:
        ZeroGreedyRank: The greedy rank is not positive.
    """
    if rho_greedy <= 0:
        raise ZeroGreedyRank("chi is undefined when rho(S_g) is 0", rho_greedy=rho_greedy)
    return rho_offered / rho_greedy - 1.0


def compare(report: OptimizationReport, ctx: RankContext, tol: float = 1e-9) -> Comparison:
    """Compute chi and check the guarantees that apply to ``report``."""
    offered, greedy_set, oracle = report.offered, report.greedy, report.oracle
    try:
        chi: Optional[float] = improvement_factor(offered.rho, greedy_set.rho)
    except ZeroGreedyRank:
        logger.warning("greedy rank is zero; chi is undefined")
        chi = None

    precondition = report.greedy_prefix is not None and report.greedy_prefix in report.starters
    corollary1 = nemhauser = prop2 = dominance = None
    ratio = None
    if oracle is not None:
        corollary1 = offered.rho >= GREEDY_RATIO * oracle.rho - tol
        nemhauser = greedy_set.rho >= GREEDY_RATIO * oracle.rho - tol
        dominance = oracle.F <= offered.F + tol and oracle.F <= greedy_set.F + tol
        if chi is not None and chi > 0:
            prop2 = offered.rho >= (1.0 + chi) * GREEDY_RATIO * oracle.rho - tol
        first = report.greedy_trace.steps[0].F if report.greedy_trace.steps else None
        if first is not None and abs(oracle.F - first) > 0:
            ratio = (greedy_set.F - first) / (oracle.F - first)

    checks = BoundChecks(
        lemma2_precondition=precondition,
        lemma2=offered.F <= greedy_set.F + tol,
        corollary1=corollary1,
        nemhauser=nemhauser,
        prop2=prop2,
        oracle_dominance=dominance,
        offered_in_family=report.offered_in_family,
    )
    return Comparison(chi=chi, greedy_ratio=ratio, checks=checks)
