"""Optimal and near-optimal set families, starter selection and greedoid checks.

The family L(nu, C) holds every non-empty set of at most C nodes whose
un-normalised rank is at least nu. Its smallest members, of cardinality m, are
the starters that the optimizer extends greedily.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from sinkopt.errors import ConstructionFailed, NoStarters, TooLarge
from sinkopt.hitting import objective_for
from sinkopt.network import EMPTY_SET, Graph, NodeSet, nodesets
from sinkopt.rank import RankContext, rho, rho_bar

logger = logging.getLogger(__name__)

DEFAULT_MAX_CARD = 3
ENUMERATION_LIMIT = 10**7
# Slack allowed when comparing a rank against the threshold nu.
RANK_TOL = 1e-12


class StarterMode(str, Enum):
    """How the starter collection is drawn from the m-element family members."""

    COVER_SUBSETS = "cover-subsets"
    GREEDOID_FEASIBLE = "greedoid-feasible"
    ALL_MINIMUM = "all-minimum"


@dataclass(frozen=True)
class Candidate:
    """A family member with its objective value and un-normalised rank."""

    nodes: NodeSet
    F: float
    rho_bar: float


@dataclass(frozen=True)
class CandidateFamily:
    """The enumerated part of L(nu, C).

    Attributes:
        nu: Rank threshold in (0, 1].
        C: Cardinality bound, the size of the reference cover.
        members: Qualifying sets ordered by cardinality, then lexicographically.
        m: Smallest member cardinality, or None when nothing qualified.
        enumeration_cap: Largest cardinality that was enumerated.
        best_f: Minimum F over all sets of each cardinality 1..enumeration_cap.
    """

    nu: float
    C: int
    members: Tuple[Candidate, ...]
    m: Optional[int]
    enumeration_cap: int
    best_f: Tuple[float, ...] = ()

    @property
    def sets(self) -> Tuple[NodeSet, ...]:
        """The member node sets."""
        return tuple(c.nodes for c in self.members)

    def level(self, n: int) -> List[NodeSet]:
        """Return G_n, the members of cardinality ``n``."""
        return [c.nodes for c in self.members if len(c.nodes) == n]

    def level_sizes(self) -> Dict[int, int]:
        """Return the number of members at every cardinality."""
        sizes: Dict[int, int] = {}
        for c in self.members:
            sizes[len(c.nodes)] = sizes.get(len(c.nodes), 0) + 1
        return sizes

    def __contains__(self, nodes: object) -> bool:
        return nodes in self._lookup

    def __len__(self) -> int:
        return len(self.members)

    @cached_property
    def _lookup(self) -> frozenset:
        return frozenset(self.sets)

    def rank_profile(self, ctx: RankContext) -> List[float]:
        """Return c_n = max over |X| <= n of rho(X), for n = 0..enumeration_cap."""
        profile = [0.0]
        for best in self.best_f:
            profile.append(max(profile[-1], rho(ctx, best)))
        return profile


def in_family(g: Graph, ctx: RankContext, nu: float, nodes: NodeSet) -> bool:
    """Decide membership in L(nu, C) by recomputing the rank of ``nodes``."""
    if not nodes or len(nodes) > ctx.C:
        return False
    return rho_bar(ctx, objective_for(g)(nodes)) >= nu - RANK_TOL


def enumerate_family(
    g: Graph,
    ctx: RankContext,
    nu: float,
    max_card: Optional[int] = None,
    threads: int = 1,
    limit: int = ENUMERATION_LIMIT,
) -> CandidateFamily:
    """Enumerate every set of at most ``max_card`` nodes with rho_bar >= nu.

    Raises:
        TooLarge: More than ``limit`` sets would have to be evaluated.
    """
    if not 0 < nu <= 1:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    cap = min(DEFAULT_MAX_CARD if max_card is None else max_card, ctx.C, g.N)
    if cap < 1:
        raise ValueError("max_card must be at least 1")
    total = sum(comb(g.N, k) for k in range(1, cap + 1))
    if total > limit:
        raise TooLarge(
            f"enumerating {total} sets exceeds the limit of {limit}", sets=total, limit=limit
        )

    objective = objective_for(g)
    members: List[Candidate] = []
    best_f: List[float] = []
    for k in range(1, cap + 1):
        level = list(nodesets(range(g.N), k))
        values = objective.evaluate(level, threads)
        best_f.append(min(values))
        for nodes, value in zip(level, values):
            rank = rho_bar(ctx, value)
            if rank >= nu - RANK_TOL:
                members.append(Candidate(nodes, value, rank))

    m = len(members[0].nodes) if members else None
    if m is None:
        logger.warning("no set of at most %d nodes reaches rank %.4g; raise max_card", cap, nu)
    return CandidateFamily(
        nu=nu, C=ctx.C, members=tuple(members), m=m, enumeration_cap=cap, best_f=tuple(best_f)
    )


@dataclass(frozen=True)
class SetFamily:
    """A finite collection of distinct canonical node sets, possibly including ∅."""

    sets: Tuple[NodeSet, ...]
    _lookup: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        lookup = frozenset(self.sets)
        if len(lookup) != len(self.sets):
            raise ValueError("set family contains duplicates")
        object.__setattr__(self, "_lookup", lookup)

    @classmethod
    def of(cls, sets: Iterable[NodeSet]) -> SetFamily:
        """Build a family in (cardinality, lexicographic) order, dropping repeats."""
        return cls(tuple(sorted(set(sets), key=lambda s: s.sort_key)))

    def __contains__(self, nodes: object) -> bool:
        return nodes in self._lookup

    def __iter__(self) -> Iterator[NodeSet]:
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    @property
    def has_empty(self) -> bool:
        """Whether ∅ is a member."""
        return EMPTY_SET in self._lookup


@dataclass(frozen=True)
class GreedoidReport:
    """Outcome of checking the three greedoid axioms, with witnesses on failure.

    Attributes:
        g1: ∅ is feasible.
        g2: Every non-empty feasible set loses some element and stays feasible.
        g2_witness: A feasible set with no feasible one-element deletion.
        g3: Every smaller feasible set can be augmented from every larger one.
        g3_witness: A pair (X, Y), |X| > |Y|, with no x in X \\ Y keeping Y + x feasible.
    """

    g1: bool
    g2: bool
    g3: bool
    g2_witness: Optional[NodeSet] = None
    g3_witness: Optional[Tuple[NodeSet, NodeSet]] = None

    @property
    def is_greedoid(self) -> bool:
        """Whether all three axioms hold."""
        return self.g1 and self.g2 and self.g3


def _g3_violation(larger: NodeSet, smaller: NodeSet, feasible: SetFamily) -> bool:
    return not any(smaller.with_node(x) in feasible for x in larger if x not in smaller)


def check_greedoid(fam: SetFamily) -> GreedoidReport:
    """Verify axioms G1 to G3 exhaustively over ``fam``."""
    g2_witness = next(
        (s for s in fam if s and not any(s.without_node(a) in fam for a in s)), None
    )
    g3_witness = None
    for x_set in fam:
        for y_set in fam:
            if len(x_set) > len(y_set) and _g3_violation(x_set, y_set, fam):
                g3_witness = (x_set, y_set)
                break
        if g3_witness is not None:
            break
    return GreedoidReport(
        g1=fam.has_empty,
        g2=g2_witness is None,
        g3=g3_witness is None,
        g2_witness=g2_witness,
        g3_witness=g3_witness,
    )


@dataclass(frozen=True)
class ClosureReport:
    """Result of testing the augmentation axiom on L(nu, C).

    Attributes:
        pairs_checked: Number of (X, Y) pairs with |X| > |Y| examined.
        exhaustive: Whether every such pair was examined.
        violations: Pairs for which no x in X \\ Y keeps Y + x in L.
        minimum_inaccessible: Whether no m-element member has a one-element
            deletion inside L, as the family's definition of m requires.
    """

    pairs_checked: int
    exhaustive: bool
    violations: Tuple[Tuple[NodeSet, NodeSet], ...]
    minimum_inaccessible: bool


def g3_closure_check(
    g: Graph,
    ctx: RankContext,
    fam: CandidateFamily,
    trials: int = 100_000,
    rng_seed: int = 0,
) -> ClosureReport:
    """Check that L(nu, C) satisfies the augmentation axiom on its enumerated members.

    Every pair is checked when there are at most ``trials`` of them; otherwise
    ``trials`` pairs are sampled with the given seed. Membership of Y + x is
    recomputed from F rather than looked up, so sets beyond the enumeration cap
    count as members when they qualify.
    """
    sets = fam.sets
    sizes = [len(s) for s in sets]
    counts = fam.level_sizes()
    total = sum(counts[a] * counts[b] for a in counts for b in counts if a > b)

    def pairs() -> Iterator[Tuple[NodeSet, NodeSet]]:
        if total <= trials:
            for x_set in sets:
                for y_set in sets:
                    if len(x_set) > len(y_set):
                        yield x_set, y_set
            return
        rng = np.random.default_rng(rng_seed)
        drawn = 0
        while drawn < trials:
            i, j = rng.integers(0, len(sets), size=2)
            if sizes[i] > sizes[j]:
                drawn += 1
                yield sets[i], sets[j]

    violations = []
    checked = 0
    for x_set, y_set in pairs():
        checked += 1
        if not any(
            in_family(g, ctx, fam.nu, y_set.with_node(x)) for x in x_set if x not in y_set
        ):
            violations.append((x_set, y_set))
    if violations:
        logger.warning("%d augmentation violation(s) in L(%.4g, %d)", len(violations), fam.nu, fam.C)

    inaccessible = True
    if fam.m is not None:
        for nodes in fam.level(fam.m):
            if any(in_family(g, ctx, fam.nu, nodes.without_node(a)) for a in nodes):
                inaccessible = False
                break
    return ClosureReport(
        pairs_checked=checked,
        exhaustive=total <= trials,
        violations=tuple(violations),
        minimum_inaccessible=inaccessible,
    )


@dataclass(frozen=True)
class GreedoidConstruction:
    """A greedoid built from L(nu, C) and the axiom report that certifies it.

    Attributes:
        family: The feasible sets.
        report: Axiom check of ``family``.
        retained: The m-element members the greedoid was grown from.
    """

    family: SetFamily
    report: GreedoidReport
    retained: Tuple[NodeSet, ...]


def _downward_closure(sets: Sequence[NodeSet]) -> List[NodeSet]:
    closure = set()
    for nodes in sets:
        for k in range(len(nodes) + 1):
            closure.update(NodeSet(c) for c in combinations(nodes.members, k))
    return list(closure)


def _assemble(fam: CandidateFamily, retained: Sequence[NodeSet], supersets: bool) -> SetFamily:
    feasible = _downward_closure(retained)
    if supersets and fam.m is not None:
        previous = set(retained)
        for n in range(fam.m + 1, fam.enumeration_cap + 1):
            level = {
                nodes
                for nodes in fam.level(n)
                if any(nodes.without_node(a) in previous for a in nodes)
            }
            feasible.extend(level)
            previous = level
    return SetFamily.of(feasible)


def build_greedoid(fam: CandidateFamily, strict: bool = True) -> GreedoidConstruction:
    """Construct a greedoid whose m-element feasible sets come from G_m.

    The feasible sets are all subsets of the retained m-element members together
    with the members of larger cardinality reachable from them by single-element
    additions inside the family. With ``strict`` every member of G_m must be
    retained: the construction is tried with and without the larger sets. Without
    ``strict`` members of G_m are admitted one at a time in order, keeping each
    that leaves the axioms intact.

    Raises:
        NoStarters: The family is empty.
        ConstructionFailed: ``strict`` is set and no attempt passes the axiom check.
    """
    if fam.m is None:
        raise NoStarters("cannot build a greedoid from an empty family")
    minimum = fam.level(fam.m)

    if strict:
        first_report = None
        for supersets in (True, False):
            family = _assemble(fam, minimum, supersets)
            report = check_greedoid(family)
            if report.is_greedoid:
                return GreedoidConstruction(family, report, tuple(minimum))
            first_report = first_report or report
        assert first_report is not None
        raise ConstructionFailed(
            "no greedoid contains every minimum member",
            g1=first_report.g1,
            g2=first_report.g2,
            g3=first_report.g3,
            g2_witness=list(first_report.g2_witness.members) if first_report.g2_witness else None,
            g3_witness=[list(s.members) for s in first_report.g3_witness]
            if first_report.g3_witness
            else None,
        )

    retained = [minimum[0]]
    family = _assemble(fam, retained, True)
    report = check_greedoid(family)
    for nodes in minimum[1:]:
        trial = _assemble(fam, [*retained, nodes], True)
        trial_report = check_greedoid(trial)
        if trial_report.is_greedoid:
            retained.append(nodes)
            family, report = trial, trial_report
    if len(retained) < len(minimum):
        logger.info("greedoid retains %d of %d minimum members", len(retained), len(minimum))
    return GreedoidConstruction(family, report, tuple(retained))


def starter_sets(
    fam: CandidateFamily,
    mode: StarterMode = StarterMode.ALL_MINIMUM,
    cover: Optional[NodeSet] = None,
    greedoid: Optional[SetFamily] = None,
) -> List[NodeSet]:
    """Select the starter collection from the m-element members of ``fam``.

    Raises:
        NoStarters: The selection is empty; callers fall back to ``all-minimum``.
    """
    if fam.m is None:
        raise NoStarters("the candidate family is empty", mode=StarterMode(mode).value)
    minimum = fam.level(fam.m)
    mode = StarterMode(mode)
    if mode is StarterMode.ALL_MINIMUM:
        chosen = minimum
    elif mode is StarterMode.COVER_SUBSETS:
        if cover is None:
            raise ValueError("cover-subsets mode needs a vertex cover")
        chosen = [nodes for nodes in minimum if nodes.issubset(cover)]
    else:
        if greedoid is None:
            greedoid = build_greedoid(fam, strict=False).family
        chosen = [nodes for nodes in minimum if nodes in greedoid]
    if not chosen:
        raise NoStarters(f"no {mode.value} starters of size {fam.m}", mode=mode.value)
    return chosen
