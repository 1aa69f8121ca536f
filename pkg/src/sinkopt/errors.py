"""Define the error hierarchy raised by sinkopt.

Every error carries a machine-readable ``code`` and the keyword details it was
raised with, so the command line can report failures as JSON.
"""

from __future__ import annotations

from typing import Any, Dict


class SinkOptError(Exception):
    """Base class for all sinkopt failures."""

    code: str = "sinkopt_error"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        """Return a JSON-ready description of the error."""
        return {"code": self.code, "message": self.message, **self.details}


class ConfigurationError(SinkOptError):
    code = "configuration_error"


# Graph ingestion


class MalformedLine(SinkOptError):
    code = "malformed_line"


class SelfLoop(SinkOptError):
    code = "self_loop"


class Disconnected(SinkOptError):
    code = "disconnected"


class EmptyGraph(SinkOptError):
    code = "empty_graph"


class UnknownNode(SinkOptError):
    code = "unknown_node"


# Hitting times


class EmptyTarget(SinkOptError):
    code = "empty_target"


class FullTarget(SinkOptError):
    code = "full_target"


class SolverFailure(SinkOptError):
    code = "solver_failure"


class StartInsideTarget(SinkOptError):
    code = "start_inside_target"


class WalkCapExceeded(SinkOptError):
    code = "walk_cap_exceeded"


# Rank functions


class NotACover(SinkOptError):
    code = "not_a_cover"


class DegenerateContext(SinkOptError):
    code = "degenerate_context"


# Candidate families


class NoStarters(SinkOptError):
    code = "no_starters"


class ConstructionFailed(SinkOptError):
    code = "construction_failed"


# Optimizers


class StarterTooLarge(SinkOptError):
    code = "starter_too_large"


class KBelowStarterSize(SinkOptError):
    code = "k_below_starter_size"


class TargetTooSmall(SinkOptError):
    code = "target_too_small"


class TooLarge(SinkOptError):
    code = "too_large"


class ZeroGreedyRank(SinkOptError):
    code = "zero_greedy_rank"


# Bounds


class ElementInSet(SinkOptError):
    code = "element_in_set"


class NoValidPairs(SinkOptError):
    code = "no_valid_pairs"


class NonPositiveEta(SinkOptError):
    code = "non_positive_eta"
