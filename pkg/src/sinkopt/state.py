"""Define the state structures for the optimizer pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

from sinkopt.candidates import CandidateFamily
from sinkopt.network import Graph, NodeSet
from sinkopt.optimizer import OptimizationReport, Selection
from sinkopt.rank import RankContext


@dataclass
class InputState:
    """Defines the input state for the pipeline, the graph and the target cardinality.

    This class is used to define the initial state and structure of incoming data.
    """

    network: Graph
    """The validated graph whose sink set is optimised."""

    k: int
    """Target cardinality K of the offered set."""


@dataclass
class State(InputState):
    """Represents the complete state of one run, extending InputState with intermediate results.

    Every field is filled by exactly one node of the pipeline.
    """

    context: Optional[RankContext] = field(default=None)
    """Normalisation constants fixed by the reference vertex cover."""

    cover: Optional[NodeSet] = field(default=None)
    """The reference vertex cover."""

    family: Optional[CandidateFamily] = field(default=None)
    """The enumerated part of L(nu, C)."""

    starters: List[NodeSet] = field(default_factory=list)
    """Starter sets, each of the minimum family cardinality m."""

    starter_source: str = ""
    """
    Where the starters came from: the configured mode, ``all-minimum`` after a
    fallback, with ``+greedy-prefix`` appended when the greedy prefix was seeded.
    """

    greedy_prefix: Optional[NodeSet] = field(default=None)
    """The first m nodes chosen by classic greedy."""

    extensions: List[Selection] = field(default_factory=list)
    """The greedy extension of every starter to K nodes."""

    offered: Optional[Selection] = field(default=None)
    """The best extension, possibly refined by single-node exchanges."""

    greedy: Optional[Selection] = field(default=None)
    """The classic greedy set at K."""

    oracle: Optional[Selection] = field(default=None)
    """The brute-force optimum at K, when requested."""

    report: Optional[OptimizationReport] = field(default=None)
    """The final report with ranks, chi and the guarantee checks."""
