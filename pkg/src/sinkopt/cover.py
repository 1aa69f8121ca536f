"""Vertex covers from a greedy maximal matching.

A walker outside a vertex cover reaches it in one step, so a cover of size C is an
optimal target set for its own cardinality and F(cover) = N - C.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

from sinkopt.network import Graph, NodeSet

__all__ = [
    "maximal_matching",
    "vertex_cover_from_matching",
    "is_vertex_cover",
    "uncovered_edge",
]


def maximal_matching(g: Graph) -> List[Tuple[int, int]]:
    """Greedily match edges scanned in lexicographic order of their endpoints.

    Returns:
        Matched index pairs ``(i, j)`` with ``i < j``, in scan order.
    """
    matched = set()
    matching = []
    for i, j in g.edges():
        if i in matched or j in matched:
            continue
        matching.append((i, j))
        matched.update((i, j))
    return matching


def vertex_cover_from_matching(g: Graph) -> NodeSet:
    """Return the endpoints of the maximal matching, a 2-approximate vertex cover."""
    return NodeSet.of(node for edge in maximal_matching(g) for node in edge)


def uncovered_edge(g: Graph, nodes: NodeSet) -> Optional[Tuple[int, int]]:
    """Return the first edge with no endpoint in ``nodes``, or None."""
    inside = set(nodes)
    for i, j in g.edges():
        if i not in inside and j not in inside:
            return (i, j)
    return None


def is_vertex_cover(g: Graph, nodes: NodeSet) -> bool:
    """Return True when every edge has an endpoint in ``nodes``."""
    return uncovered_edge(g, nodes) is None
