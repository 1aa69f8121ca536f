"""Normalisation constants and the rank functions built on F.

The un-normalised rank maps the worst singleton to 0 and the reference vertex
cover to 1::

    rho_bar(A) = (F_max - F(A)) / (F_max - F_min)

The normalised rank ``rho(A) = rho_bar(A) - rho_bar(∅)`` uses the set-function
extension of F to the empty set, making it non-negative and submodular.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Tuple

from sinkopt.cover import is_vertex_cover, uncovered_edge, vertex_cover_from_matching
from sinkopt.errors import DegenerateContext, NotACover
from sinkopt.hitting import objective_for
from sinkopt.network import EMPTY_SET, Graph, NodeSet

logger = logging.getLogger(__name__)

# F(∅) is maximised exactly up to this many nodes.
EXACT_EMPTY_NODES = 12
# Above EXACT_EMPTY_NODES, parts are capped at this many elements.
CAPPED_PART_SIZE = 2
# Objective values closer than this (relative) are treated as ties.
TIE_TOL = 1e-10


@dataclass(frozen=True)
class EmptySetValue:
    """The extension F(∅) = max over disjoint X, Y of F(X) + F(Y) - F(X ∪ Y).

    Attributes:
        value: The maximum found.
        exact: Whether every disjoint pair was considered.
        max_part_size: Largest |X| and |Y| that were enumerated.
        witness: A maximising pair (X, Y).
    """

    value: float
    exact: bool
    max_part_size: int
    witness: Tuple[NodeSet, NodeSet]


@dataclass(frozen=True)
class RankContext:
    """Frozen constants that make rho_bar and rho well defined.

    Attributes:
        C: Cardinality of the reference vertex cover.
        cover: The reference vertex cover.
        f_max: Largest F over singletons.
        f_min: F of the reference cover, N - C.
        f_empty: F(∅) under the set-function extension.
        exact_empty: Whether f_empty was maximised over every disjoint pair.
        empty_part_cap: Largest part size used for f_empty.
        f_max_nodes: Every singleton attaining f_max.
    """

    C: int
    cover: NodeSet
    f_max: float
    f_min: float
    f_empty: float
    exact_empty: bool
    empty_part_cap: int
    f_max_nodes: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.f_max > self.f_min:
            raise DegenerateContext(
                f"F_max ({self.f_max}) must exceed F_min ({self.f_min})",
                f_max=self.f_max,
                f_min=self.f_min,
            )

    @property
    def scale(self) -> float:
        """The denominator F_max - F_min."""
        return self.f_max - self.f_min

    @property
    def rho_bar_empty(self) -> float:
        """rho_bar(∅) = (F_max - F(∅)) / (F_max - F_min), never positive."""
        return (self.f_max - self.f_empty) / self.scale


@dataclass(frozen=True)
class RankedSet:
    """A node set together with its objective value and both ranks."""

    nodes: NodeSet
    F: float
    rho_bar: float
    rho: float


def singleton_values(g: Graph, threads: int = 1) -> List[float]:
    """Return F({i}) for every node index i."""
    return objective_for(g).evaluate((NodeSet((i,)) for i in range(g.N)), threads)


def f_max(g: Graph, threads: int = 1) -> float:
    """Return the maximum of F over all one-element sets."""
    return max(singleton_values(g, threads))


def f_min(g: Graph, cover: NodeSet) -> float:
    """Return F of a vertex cover, which equals N - |cover|.

    Raises:
        NotACover: Some edge has no endpoint in ``cover``.
    """
    edge = uncovered_edge(g, cover)
    if edge is not None:
        raise NotACover(
            f"edge ({g.label_of(edge[0])}, {g.label_of(edge[1])}) is not covered",
            edge=[g.label_of(edge[0]), g.label_of(edge[1])],
        )
    if len(cover) == g.N:
        return 0.0
    return objective_for(g)(cover)


def default_part_cap(n: int) -> int:
    """Return the part-size cap used for F(∅) on an ``n``-node graph."""
    if n <= EXACT_EMPTY_NODES:
        return n
    return CAPPED_PART_SIZE


def f_empty(g: Graph, max_part_size: Optional[int] = None, threads: int = 1) -> EmptySetValue:
    """Maximise F(X) + F(Y) - F(X ∪ Y) over disjoint non-empty X, Y.

    Args:
        g: The graph.
        max_part_size: Largest |X| and |Y| to enumerate. Defaults to
            :func:`default_part_cap`.
        threads: Worker threads for evaluating F.
    """
    cap = default_part_cap(g.N) if max_part_size is None else max_part_size
    if cap < 1:
        raise ValueError("max_part_size must be at least 1")
    cap = min(cap, g.N - 1)
    exact = cap >= g.N - 1
    if not exact:
        logger.warning("F(∅) maximised over parts of at most %d nodes (capped)", cap)

    objective = objective_for(g)
    nodes = range(g.N)
    pairs: List[Tuple[NodeSet, NodeSet, NodeSet]] = []
    for size_x in range(1, cap + 1):
        for x in combinations(nodes, size_x):
            # Unordered pairs: the part holding the smallest node comes first.
            rest = [v for v in nodes if v > x[0] and v not in x]
            for size_y in range(1, min(cap, len(rest)) + 1):
                for y in combinations(rest, size_y):
                    pairs.append((NodeSet(x), NodeSet(y), NodeSet.of((*x, *y))))

    unions = sorted({u for _, _, u in pairs}, key=lambda s: s.sort_key)
    objective.evaluate(unions, threads)
    parts = sorted({p for x, y, _ in pairs for p in (x, y)}, key=lambda s: s.sort_key)
    objective.evaluate(parts, threads)

    best = -float("inf")
    witness = (EMPTY_SET, EMPTY_SET)
    for x, y, u in pairs:
        value = objective(x) + objective(y) - objective(u)
        if value > best:
            best, witness = value, (x, y)
    return EmptySetValue(value=best, exact=exact, max_part_size=cap, witness=witness)


def reference_cover(g: Graph, cover_size: Optional[int] = None) -> NodeSet:
    """Return the vertex cover that fixes C and F_min.

    Without ``cover_size`` this is the maximal-matching cover. A larger size is
    reached by adding the smallest-label outside nodes, a smaller one by dropping
    nodes, in label order, whose neighbours all remain in the cover.

    Raises:
        NotACover: No cover of the requested size could be constructed.
    """
    cover = vertex_cover_from_matching(g)
    if cover_size is None or cover_size == len(cover):
        return cover
    if not 1 <= cover_size <= g.N:
        raise NotACover(f"cover size {cover_size} is outside [1, {g.N}]", cover_size=cover_size)
    members = set(cover)
    if cover_size > len(cover):
        for node in range(g.N):
            if len(members) == cover_size:
                break
            members.add(node)
        return NodeSet.of(members)
    for node in sorted(cover):
        if len(members) == cover_size:
            break
        if all(nbr in members for nbr in g.adjacency[node]):
            members.discard(node)
    result = NodeSet.of(members)
    if len(result) != cover_size or not is_vertex_cover(g, result):
        raise NotACover(
            f"could not construct a vertex cover with {cover_size} nodes", cover_size=cover_size
        )
    return result


def rank_context(
    g: Graph,
    cover: Optional[NodeSet] = None,
    cover_size: Optional[int] = None,
    max_part_size: Optional[int] = None,
    threads: int = 1,
) -> RankContext:
    """Compute C, F_max, F_min and F(∅) for ``g``.

    Raises:
        NotACover: The supplied or requested cover is not a vertex cover.
        DegenerateContext: F_max equals F_min.
    """
    if cover is None:
        cover = reference_cover(g, cover_size)
    minimum = f_min(g, cover)
    maximum = f_max(g, threads)
    singles = singleton_values(g, threads)
    empty = f_empty(g, max_part_size, threads)
    return RankContext(
        C=len(cover),
        cover=cover,
        f_max=maximum,
        f_min=minimum,
        f_empty=empty.value,
        exact_empty=empty.exact,
        empty_part_cap=empty.max_part_size,
        f_max_nodes=tuple(
            i for i, v in enumerate(singles) if v >= maximum - TIE_TOL * max(1.0, abs(maximum))
        ),
    )


def rho_bar(ctx: RankContext, f_value: float) -> float:
    """Return the un-normalised rank of a set whose objective is ``f_value``."""
    return (ctx.f_max - f_value) / ctx.scale


def rho(ctx: RankContext, f_value: float) -> float:
    """Return the normalised rank rho_bar(A) - rho_bar(∅)."""
    return rho_bar(ctx, f_value) - ctx.rho_bar_empty


def ranked(g: Graph, ctx: RankContext, nodes: NodeSet) -> RankedSet:
    """Evaluate F and both ranks of ``nodes``; the empty set uses F(∅)."""
    value = objective_for(g)(nodes) if nodes else ctx.f_empty
    return RankedSet(nodes=nodes, F=value, rho_bar=rho_bar(ctx, value), rho=rho(ctx, value))
