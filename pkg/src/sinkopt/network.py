"""Undirected graphs, canonical node sets and random-walk transition matrices.

Graphs are parsed from edge-list text, validated once and then treated as
immutable. Internally every node is addressed by a contiguous index; the original
integer labels are kept for all input and output.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from sinkopt.errors import (
    Disconnected,
    EmptyGraph,
    EmptyTarget,
    FullTarget,
    MalformedLine,
    SelfLoop,
    UnknownNode,
)

logger = logging.getLogger(__name__)

_LABEL = re.compile(r"^\d+$", re.ASCII)

# Row sums of a transition matrix must equal one within this tolerance.
ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, order=True)
class NodeSet:
    """A canonical, strictly increasing set of node indices.

    Ordering compares the member tuples lexicographically, which is the tie-break
    used for set choices throughout the package.
    """

    members: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if any(a >= b for a, b in zip(self.members, self.members[1:])):
            raise ValueError(f"NodeSet members must be strictly increasing: {self.members}")
        if self.members and self.members[0] < 0:
            raise ValueError(f"NodeSet members must be non-negative: {self.members}")

    @classmethod
    def of(cls, items: Iterable[int]) -> NodeSet:
        """Create the canonical set of the given indices."""
        return cls(tuple(sorted(set(items))))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, item: object) -> bool:
        return item in self.members

    def __bool__(self) -> bool:
        return bool(self.members)

    def with_node(self, node: int) -> NodeSet:
        """Return this set with ``node`` added."""
        return NodeSet.of((*self.members, node))

    def without_node(self, node: int) -> NodeSet:
        """Return this set with ``node`` removed."""
        return NodeSet(tuple(m for m in self.members if m != node))

    def union(self, other: Iterable[int]) -> NodeSet:
        """Return the union with another collection of indices."""
        return NodeSet.of((*self.members, *other))

    def issubset(self, other: NodeSet) -> bool:
        """Return True when every member also belongs to ``other``."""
        return set(self.members) <= set(other.members)

    @property
    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        """Order by cardinality first, then lexicographically."""
        return (len(self.members), self.members)


EMPTY_SET = NodeSet()


@dataclass(frozen=True)
class Graph:
    """An immutable, connected, simple undirected graph.

    Attributes:
        node_labels: Original integer labels, sorted; position ``i`` is index ``i``.
        adjacency: Sorted neighbour indices of every node.
    """

    node_labels: Tuple[int, ...]
    adjacency: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.node_labels:
            raise EmptyGraph("graph has no edges")
        if len(self.node_labels) != len(self.adjacency):
            raise ValueError("node_labels and adjacency must have the same length")
        for i, nbrs in enumerate(self.adjacency):
            if i in nbrs:
                raise SelfLoop(
                    f"self-loop at node {self.node_labels[i]}", label=self.node_labels[i]
                )
            if not nbrs:
                raise ValueError(f"node {self.node_labels[i]} has degree 0")
            if len(set(nbrs)) != len(nbrs) or list(nbrs) != sorted(nbrs):
                raise ValueError(f"adjacency of node {self.node_labels[i]} must be sorted and unique")
            for j in nbrs:
                if i not in self.adjacency[j]:
                    raise ValueError(
                        f"edge ({self.node_labels[i]}, {self.node_labels[j]}) is not symmetric"
                    )
        components = list(nx.connected_components(self.to_networkx()))
        if len(components) > 1:
            labelled = sorted(sorted(c) for c in components)
            raise Disconnected(
                f"graph has {len(components)} connected components", components=labelled
            )

    @classmethod
    def from_edges(cls, edges: Iterable[Tuple[int, int]]) -> Graph:
        """Build a graph from label pairs, collapsing duplicate edges."""
        pairs = set()
        for u, v in edges:
            if u == v:
                raise SelfLoop(f"self-loop at node {u}", label=u)
            pairs.add((min(u, v), max(u, v)))
        if not pairs:
            raise EmptyGraph("graph has no edges")
        labels = tuple(sorted({x for edge in pairs for x in edge}))
        index = {label: i for i, label in enumerate(labels)}
        nbrs: List[List[int]] = [[] for _ in labels]
        for u, v in pairs:
            nbrs[index[u]].append(index[v])
            nbrs[index[v]].append(index[u])
        return cls(labels, tuple(tuple(sorted(n)) for n in nbrs))

    @property
    def N(self) -> int:  # noqa: N802
        """Number of nodes."""
        return len(self.node_labels)

    @property
    def M(self) -> int:  # noqa: N802
        """Number of edges."""
        return sum(len(n) for n in self.adjacency) // 2

    @cached_property
    def _index(self) -> Dict[int, int]:
        return {label: i for i, label in enumerate(self.node_labels)}

    def degree(self, node: int) -> int:
        """Return the degree of the node with index ``node``."""
        return len(self.adjacency[node])

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Yield index pairs ``(i, j)`` with ``i < j`` in lexicographic order."""
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if i < j:
                    yield (i, j)

    def index_of(self, label: int) -> int:
        """Map an original label to its internal index."""
        try:
            return self._index[label]
        except KeyError:
            raise UnknownNode(f"node {label} is not in the graph", label=label) from None

    def label_of(self, node: int) -> int:
        """Map an internal index to its original label."""
        return self.node_labels[node]

    def nodeset(self, labels: Iterable[int]) -> NodeSet:
        """Build a NodeSet from original labels."""
        return NodeSet.of(self.index_of(label) for label in labels)

    def labels(self, nodes: Iterable[int]) -> List[int]:
        """Return the original labels of the given indices, in index order."""
        return [self.node_labels[i] for i in sorted(nodes)]

    def vertices(self) -> NodeSet:
        """Return the full vertex set V."""
        return NodeSet(tuple(range(self.N)))

    def to_networkx(self) -> nx.Graph:
        """Return a networkx view of the graph keyed by original labels."""
        g = nx.Graph()
        g.add_nodes_from(self.node_labels)
        g.add_edges_from((self.node_labels[i], self.node_labels[j]) for i, j in self.edges())
        return g


@dataclass(frozen=True)
class ParseReport:
    """Bookkeeping from reading an edge list."""

    lines: int = 0
    edges_read: int = 0
    duplicate_edges: int = 0
    skipped_lines: int = 0


def read_edge_list(text: Union[str, Iterable[str]]) -> Tuple[Graph, ParseReport]:
    """Parse edge-list text into a validated graph plus a parse report.

    Each non-blank, non-comment line holds two whitespace-separated non-negative
    integer labels. Duplicate edges are collapsed and counted.

    Raises:
        MalformedLine: A line does not hold exactly two non-negative integers.
        SelfLoop: A line joins a node to itself.
        EmptyGraph: No edges were found.
        Disconnected: The edges do not form a single component.
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    seen = set()
    ordered: List[Tuple[int, int]] = []
    read = duplicates = skipped = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            skipped += 1
            continue
        tokens = line.split()
        if len(tokens) != 2 or not all(_LABEL.match(t) for t in tokens):
            raise MalformedLine(f"line {lineno}: expected 'u v', got {raw!r}", line=lineno)
        u, v = int(tokens[0]), int(tokens[1])
        if u == v:
            raise SelfLoop(f"line {lineno}: self-loop at node {u}", label=u, line=lineno)
        read += 1
        key = (min(u, v), max(u, v))
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        ordered.append(key)
    if duplicates:
        logger.warning("collapsed %d duplicate edge(s)", duplicates)
    graph = Graph.from_edges(ordered)
    return graph, ParseReport(
        lines=len(lines), edges_read=read, duplicate_edges=duplicates, skipped_lines=skipped
    )


def parse_edge_list(text: Union[str, Iterable[str]]) -> Graph:
    """Parse edge-list text into a validated graph."""
    return read_edge_list(text)[0]


def load_graph(path: Union[str, Path]) -> Tuple[Graph, ParseReport]:
    """Read a UTF-8 edge-list file."""
    return read_edge_list(Path(path).read_text(encoding="utf-8"))


def to_edge_list(g: Graph) -> str:
    """Serialise a graph as edge-list text using the original labels."""
    return "".join(f"{g.label_of(i)} {g.label_of(j)}\n" for i, j in g.edges())


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Dense row-stochastic matrix of the simple random walk, p(i, j) = 1/deg(i)."""

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        sums = self.probabilities.sum(axis=1)
        if not np.allclose(sums, 1.0, rtol=0.0, atol=ROW_SUM_TOL):
            raise ValueError("transition matrix rows must sum to 1")
        self.probabilities.setflags(write=False)

    @property
    def size(self) -> int:
        """Dimension N of the matrix."""
        return int(self.probabilities.shape[0])


@dataclass(frozen=True, eq=False)
class RestrictedMatrix:
    """Principal submatrix of a transition matrix on the nodes outside a target set.

    Attributes:
        matrix: The sub-stochastic block on the retained rows and columns.
        index: Node index of each retained row, in increasing order.
    """

    matrix: np.ndarray
    index: Tuple[int, ...]


@lru_cache(maxsize=64)
def transition_matrix(g: Graph) -> TransitionMatrix:
    """Return the simple random-walk transition matrix of ``g``."""
    p = np.zeros((g.N, g.N), dtype=np.float64)
    for i, nbrs in enumerate(g.adjacency):
        p[i, list(nbrs)] = 1.0 / len(nbrs)
    return TransitionMatrix(p)


def restrict(p: TransitionMatrix, a: NodeSet) -> RestrictedMatrix:
    """Cross out the rows and columns of ``p`` belonging to the target set ``a``.

    Raises:
        EmptyTarget: ``a`` is empty.
        FullTarget: ``a`` contains every node.
    """
    if not a:
        raise EmptyTarget("target set is empty")
    if len(a) >= p.size:
        raise FullTarget("target set contains every node")
    keep = complement(a, p.size)
    sub = p.probabilities[np.ix_(keep, keep)]
    return RestrictedMatrix(sub, tuple(keep))


def complement(a: NodeSet, n: int) -> List[int]:
    """Return the indices in ``range(n)`` outside ``a``."""
    inside = set(a)
    return [i for i in range(n) if i not in inside]


def nodesets(items: Sequence[int], size: int) -> Iterator[NodeSet]:
    """Yield all ``size``-element NodeSets of ``items`` in lexicographic order."""
    for combo in combinations(sorted(items), size):
        yield NodeSet(combo)
