"""Curvature, increment and rank bounds for the normalised rank function.

These quantities bound how far the rank can drop when nodes are removed from a
vertex cover, which in turn bounds the smallest useful starter size m(nu) and the
improvement factor chi over the classic greedy set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from sinkopt.candidates import CandidateFamily, StarterMode, enumerate_family, starter_sets
from sinkopt.errors import ElementInSet, NonPositiveEta, NoStarters, NoValidPairs, TooLarge
from sinkopt.hitting import objective_for
from sinkopt.network import Graph, NodeSet
from sinkopt.optimizer import OptimizationReport, brute_force_oracle, compare, greedy, solve_starter
from sinkopt.rank import RankContext, ranked, rho, rho_bar

logger = logging.getLogger(__name__)

# Increments at or below this are treated as zero denominators.
ZERO_INCREMENT = 1e-12
# gamma is taken over every subset of the cover when it has at most this many nodes.
GAMMA_EXHAUSTIVE_NODES = 16
CURVATURE_LIMIT = 10**7

RankFn = Callable[[NodeSet], float]


@dataclass(frozen=True)
class CurvatureReport:
    """Forward elemental curvature and the largest rank increment inside the cover.

    Attributes:
        kappa: Largest ratio rho_i(A + j) / rho_i(A) over the family.
        gamma: Largest rho_j(S) over non-empty S strictly inside the cover, j in T \\ S.
        arg_kappa: The (A, i, j) attaining kappa.
        arg_gamma: The (S, j) attaining gamma.
        increments_computed: Ratios evaluated.
        skipped_zero_denominators: Pairs skipped because rho_i(A) was zero.
        gamma_scope: ``"cover-subsets"`` or ``"family-cover-subsets"``.
    """

    kappa: float
    gamma: Optional[float]
    arg_kappa: Optional[Tuple[NodeSet, int, int]]
    arg_gamma: Optional[Tuple[NodeSet, int]]
    increments_computed: int
    skipped_zero_denominators: int
    gamma_scope: str = "cover-subsets"


def _rank_fn(g: Graph, ctx: RankContext) -> RankFn:
    objective = objective_for(g)
    return lambda nodes: rho(ctx, objective(nodes)) if nodes else 0.0


def rank_increment(g: Graph, ctx: RankContext, a: NodeSet, i: int) -> float:
    """Return rho_i(A) = rho(A + i) - rho(A) = (F(A) - F(A + i)) / (F_max - F_min).

    Raises:
        ElementInSet: ``i`` already belongs to ``a``.
    """
    if i in a:
        raise ElementInSet(f"node {i} is already in the set", node=i)
    objective = objective_for(g)
    before = objective(a) if a else ctx.f_empty
    return (before - objective(a.with_node(i))) / ctx.scale


def curvature_of(
    rank_fn: RankFn, sets: Iterable[NodeSet], n: int
) -> Tuple[float, Optional[Tuple[NodeSet, int, int]], int, int]:
    """Compute the forward elemental curvature of ``rank_fn`` over ``sets``.

    Returns:
        ``(kappa, witness, computed, skipped)``.

    Raises:
        NoValidPairs: Every increment in the denominator was zero.
    """
    kappa = -1.0
    witness = None
    computed = skipped = 0
    for a in sets:
        outside = [v for v in range(n) if v not in a]
        base = rank_fn(a)
        single = {i: rank_fn(a.with_node(i)) for i in outside}
        for i in outside:
            denominator = single[i] - base
            for j in outside:
                if j == i:
                    continue
                if denominator <= ZERO_INCREMENT:
                    skipped += 1
                    continue
                ratio = (rank_fn(a.union((i, j))) - single[j]) / denominator
                computed += 1
                if ratio > kappa:
                    kappa, witness = ratio, (a, i, j)
    if computed == 0:
        raise NoValidPairs("every rank increment in the family is zero", skipped=skipped)
    if skipped:
        logger.info("skipped %d curvature pair(s) with zero increment", skipped)
    return max(kappa, 0.0), witness, computed, skipped


def max_increment(
    rank_fn: RankFn, subsets: Iterable[NodeSet], cover: NodeSet
) -> Tuple[Optional[float], Optional[Tuple[NodeSet, int]]]:
    """Return the largest rho_j(S) for j in ``cover`` outside S, with its witness."""
    gamma = None
    witness = None
    for s in subsets:
        base = rank_fn(s)
        for j in cover:
            if j in s:
                continue
            value = rank_fn(s.with_node(j)) - base
            if gamma is None or value > gamma:
                gamma, witness = value, (s, j)
    return gamma, witness


def cover_subsets(cover: NodeSet) -> List[NodeSet]:
    """Return every non-empty proper subset of ``cover``, smallest first."""
    return [
        NodeSet(c) for k in range(1, len(cover)) for c in combinations(cover.members, k)
    ]


def elemental_curvature(
    g: Graph,
    ctx: RankContext,
    fam: Union[CandidateFamily, Sequence[NodeSet]],
    threads: int = 1,
    limit: int = CURVATURE_LIMIT,
) -> CurvatureReport:
    """Compute kappa over the family and gamma over subsets of the reference cover.

    gamma ranges over every non-empty proper subset of the cover when it has at
    most GAMMA_EXHAUSTIVE_NODES nodes, and over the family members inside the
    cover otherwise.

    Raises:
        NoValidPairs: The family is empty or all denominators are zero.
        TooLarge: The family needs more than ``limit`` pair evaluations.
    """
    sets = list(fam.sets if isinstance(fam, CandidateFamily) else fam)
    if not sets:
        raise NoValidPairs("the family is empty")
    total = sum((g.N - len(a)) * (g.N - len(a) - 1) for a in sets)
    if total > limit:
        raise TooLarge(f"{total} curvature pairs exceed the limit of {limit}", pairs=total, limit=limit)

    objective = objective_for(g)
    needed = {
        a.union(extra)
        for a in sets
        for extra in combinations([v for v in range(g.N) if v not in a], 2)
    }
    needed.update(a.with_node(i) for a in sets for i in range(g.N) if i not in a)
    objective.evaluate(sorted(needed, key=lambda s: s.sort_key), threads)

    rank_fn = _rank_fn(g, ctx)
    kappa, arg_kappa, computed, skipped = curvature_of(rank_fn, sets, g.N)

    if len(ctx.cover) <= GAMMA_EXHAUSTIVE_NODES:
        scope, subsets = "cover-subsets", cover_subsets(ctx.cover)
    else:
        scope = "family-cover-subsets"
        subsets = [a for a in sets if a.issubset(ctx.cover) and len(a) < len(ctx.cover)]
    gamma, arg_gamma = max_increment(rank_fn, subsets, ctx.cover)
    return CurvatureReport(
        kappa=kappa,
        gamma=gamma,
        arg_kappa=arg_kappa,
        arg_gamma=arg_gamma,
        increments_computed=computed,
        skipped_zero_denominators=skipped,
        gamma_scope=scope,
    )


def rank_lower_bound(kappa: float, gamma: float, r: int) -> float:
    """Return 1 - gamma * (1 + kappa + ... + kappa^(r-1)).

    This lower-bounds rho_bar(S) for S inside a vertex cover T with |T \\ S| = r.
    """
    if not 0 <= kappa <= 1 + 1e-9:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if r < 0:
        raise ValueError("r must be non-negative")
    if r == 0:
        return 1.0
    if abs(kappa - 1.0) <= 1e-12:
        return 1.0 - r * gamma
    return 1.0 - gamma * (1.0 - kappa**r) / (1.0 - kappa)


def r_of_nu(kappa: float, gamma: float, nu: float, c: int) -> int:
    """Return the largest r <= C - 1 whose rank lower bound still reaches ``nu``."""
    if not 0 < nu <= 1:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    r = 0
    while r + 1 <= c - 1 and rank_lower_bound(kappa, gamma, r + 1) >= nu - 1e-12:
        r += 1
    return r


def m_of_nu(kappa: float, gamma: float, nu: float, c: int) -> int:
    """Return m(nu) = C - r(nu), the smallest starter size compatible with ``nu``."""
    return c - r_of_nu(kappa, gamma, nu, c)


@dataclass(frozen=True)
class ChiBound:
    """Lower bound on the improvement factor chi.

    Attributes:
        eta: Normalised rank threshold.
        rho_greedy: rho(S_g).
        preconditions_met: Whether 0 < rho(S_g) < eta.
        delta: 1 - rho(S_g) / eta when the preconditions hold.
        chi_lower: delta / (1 - delta) when the preconditions hold.
    """

    eta: float
    rho_greedy: float
    preconditions_met: bool
    delta: Optional[float] = None
    chi_lower: Optional[float] = None


def chi_lower_bound(eta: float, rho_greedy: float) -> ChiBound:
    """Bound chi from below when the greedy rank falls short of ``eta``.

    Raises:
        NonPositiveEta: ``eta`` is not positive.
    """
    if eta <= 0:
        raise NonPositiveEta(f"eta must be positive, got {eta}", eta=eta)
    if not 0 < rho_greedy < eta:
        return ChiBound(eta=eta, rho_greedy=rho_greedy, preconditions_met=False)
    delta = 1.0 - rho_greedy / eta
    return ChiBound(
        eta=eta,
        rho_greedy=rho_greedy,
        preconditions_met=True,
        delta=delta,
        chi_lower=delta / (1.0 - delta),
    )


@dataclass(frozen=True)
class BoundReport:
    """Rank bounds at cardinality K and the resulting chi lower bound.

    Attributes:
        K: Target cardinality.
        r: C - K, the number of cover nodes removed.
        eta_bar: Lower bound on rho_bar of a K-node subset of the cover.
        eta: eta_bar - rho_bar(∅).
        m_of_nu: Smallest starter size compatible with nu.
        chi_bound: Lower bound on chi, if eta is positive.
        chi: The observed chi, if known.
        rho_offered: rho(S*), if known.
        greedy_below: rho(S_g) < min(nu, eta).
        offered_above_eta: rho(S*) > eta.
        chi_exceeds_lower: chi > delta / (1 - delta), when all of the above hold.
    """

    K: int
    nu: float
    kappa: float
    gamma: float
    r: int
    eta_bar: float
    eta: float
    m_of_nu: int
    chi_bound: Optional[ChiBound]
    chi: Optional[float] = None
    rho_offered: Optional[float] = None
    greedy_below: Optional[bool] = None
    offered_above_eta: Optional[bool] = None
    chi_exceeds_lower: Optional[bool] = None


def bound_report(
    ctx: RankContext,
    curvature: CurvatureReport,
    k: int,
    nu: float,
    rho_greedy: float,
    rho_offered: Optional[float] = None,
    chi: Optional[float] = None,
) -> BoundReport:
    """Assemble eta, m(nu) and the chi lower bound for a run at cardinality ``k``."""
    kappa = min(curvature.kappa, 1.0)
    gamma = 1.0 if curvature.gamma is None else min(max(curvature.gamma, 0.0), 1.0)
    r = max(ctx.C - k, 0)
    eta_bar = rank_lower_bound(kappa, gamma, r)
    eta = eta_bar - ctx.rho_bar_empty
    chi_bound = chi_lower_bound(eta, rho_greedy) if eta > 0 else None
    greedy_below = rho_greedy < min(nu, eta)
    above = None if rho_offered is None else rho_offered > eta
    exceeds = None
    if chi_bound is not None and chi_bound.preconditions_met and above and chi is not None:
        exceeds = chi > chi_bound.chi_lower
    return BoundReport(
        K=k,
        nu=nu,
        kappa=kappa,
        gamma=gamma,
        r=r,
        eta_bar=eta_bar,
        eta=eta,
        m_of_nu=m_of_nu(kappa, gamma, nu, ctx.C),
        chi_bound=chi_bound,
        chi=chi,
        rho_offered=rho_offered,
        greedy_below=greedy_below,
        offered_above_eta=above,
        chi_exceeds_lower=exceeds,
    )


@dataclass(frozen=True)
class GuaranteeFindings:
    """Identity and inequality checks on one small instance.

    Violation lists hold ``(S, chain)`` pairs; any telescoping violation points at
    an implementation bug, since that identity is exact.
    """

    kappa: float
    gamma: float
    chains_checked: int
    telescoping_violations: Tuple[Tuple[NodeSet, Tuple[int, ...]], ...]
    curvature_violations: Tuple[Tuple[NodeSet, Tuple[int, ...]], ...]
    rank_bound_checked: int
    rank_bound_violations: Tuple[NodeSet, ...]
    min_curvature_slack: float
    report: Optional[OptimizationReport] = None

    @property
    def clean(self) -> bool:
        """Whether no identity or inequality was violated."""
        checks = self.report.checks if self.report else None
        guarantees = (
            checks is None
            or (checks.lemma2 and checks.corollary1 is not False and checks.nemhauser is not False)
        )
        return (
            not self.telescoping_violations
            and not self.curvature_violations
            and not self.rank_bound_violations
            and bool(guarantees)
        )


def verify_guarantees(
    g: Graph,
    ctx: RankContext,
    k: int,
    nu: float,
    orders: int = 3,
    rng_seed: int = 0,
    tol: float = 1e-9,
    threads: int = 1,
) -> GuaranteeFindings:
    """Check the chain identity and the rank bounds inside the reference cover.

    For every non-empty proper subset S of the cover T and several orderings of
    T \\ S, this checks that the rank increments telescope to rho(T) - rho(S),
    that they are dominated by the curvature-discounted increments at S, and that
    rho_bar(S) respects :func:`rank_lower_bound`. It then runs the starter method
    with the greedy prefix among the starters against the brute-force optimum.
    """
    cover = ctx.cover
    if len(cover) > GAMMA_EXHAUSTIVE_NODES:
        raise TooLarge(f"cover of {len(cover)} nodes is too large to verify exhaustively")
    rank_fn = _rank_fn(g, ctx)
    subsets = cover_subsets(cover)
    # Unclamped, so the chain inequalities follow exactly from the definitions.
    try:
        kappa, _, _, _ = curvature_of(rank_fn, [*subsets, cover], g.N)
    except NoValidPairs:
        # Only chains of a single node exist, which need no curvature.
        kappa = 0.0
    gamma, _ = max_increment(rank_fn, subsets, cover)
    gamma = gamma or 0.0

    rng = np.random.default_rng(rng_seed)
    top = rank_fn(cover)
    objective = objective_for(g)
    telescoping, curvature_v, rank_v = [], [], []
    chains = 0
    min_slack = float("inf")
    for s in subsets:
        rest = [v for v in cover if v not in s]
        chain_orders = {tuple(rest)}
        for _ in range(orders):
            chain_orders.add(tuple(int(v) for v in rng.permutation(rest)))
        base = rank_fn(s)
        for chain in sorted(chain_orders):
            chains += 1
            total = 0.0
            discounted = 0.0
            current = s
            for t, j in enumerate(chain):
                total += rank_fn(current.with_node(j)) - rank_fn(current)
                discounted += kappa**t * (rank_fn(s.with_node(j)) - base)
                current = current.with_node(j)
            if abs((top - base) - total) > tol:
                telescoping.append((s, chain))
            gap = rho_bar(ctx, objective(cover)) - rho_bar(ctx, objective(s))
            min_slack = min(min_slack, discounted - gap)
            if gap > discounted + tol:
                curvature_v.append((s, chain))
        bound = 1.0 - gamma * sum(kappa**t for t in range(len(rest)))
        if rho_bar(ctx, objective(s)) < bound - tol:
            rank_v.append(s)

    report = None
    try:
        report = _guarantee_run(g, ctx, k, nu, tol, threads)
    except (NoStarters, ValueError) as exc:
        logger.info("starter method not applicable at K=%d: %s", k, exc)

    return GuaranteeFindings(
        kappa=kappa,
        gamma=gamma,
        chains_checked=chains,
        telescoping_violations=tuple(telescoping),
        curvature_violations=tuple(curvature_v),
        rank_bound_checked=len(subsets),
        rank_bound_violations=tuple(rank_v),
        min_curvature_slack=min_slack,
        report=report,
    )


def _guarantee_run(
    g: Graph, ctx: RankContext, k: int, nu: float, tol: float, threads: int
) -> OptimizationReport:
    fam = enumerate_family(g, ctx, nu, max_card=min(k, ctx.C), threads=threads)
    starters = starter_sets(fam, StarterMode.ALL_MINIMUM)
    assert fam.m is not None
    if k < fam.m:
        raise ValueError(f"K={k} is below the starter size m={fam.m}")
    baseline = greedy(g, k)
    prefix = NodeSet.of(step.added for step in baseline.steps[: fam.m] if step.added is not None)
    if prefix not in starters:
        starters = [*starters, prefix]
    solution = solve_starter(g, starters, k, threads)
    oracle = brute_force_oracle(g, k, threads)
    report = OptimizationReport(
        K=k,
        offered=ranked(g, ctx, solution.offered.nodes),
        greedy=ranked(g, ctx, baseline.nodes),
        greedy_trace=baseline,
        starters=tuple(starters),
        extensions=solution.extensions,
        greedy_prefix=prefix,
        oracle=ranked(g, ctx, oracle.nodes),
    )
    comparison = compare(report, ctx, tol)
    return replace(
        report, chi=comparison.chi, greedy_ratio=comparison.greedy_ratio, checks=comparison.checks
    )
