"""Sink Set Optimizer.

This package chooses target sets on a graph that minimise the total expected
random-walk hitting time, by greedily extending near-optimal starter sets.
"""

from sinkopt.graph import graph

__all__ = ["graph"]
