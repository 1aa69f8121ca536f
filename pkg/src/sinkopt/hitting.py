"""Expected hitting times of the simple random walk and the objective F(A).

h(i, A) solves (I - P_A) H = 1, where P_A is the transition matrix with the rows
and columns of A crossed out, and F(A) is the sum of the h values.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from sinkopt.errors import EmptyTarget, SolverFailure, StartInsideTarget, WalkCapExceeded
from sinkopt.network import Graph, NodeSet, restrict, transition_matrix
from sinkopt.utils import parallel_map

logger = logging.getLogger(__name__)

# Solves whose condition estimate exceeds this are reported.
CONDITION_WARNING = 1e12

# A single simulated walk may not take more steps than this.
MAX_WALK_STEPS = 10**7

# Restricted blocks up to this order get their spectral radius from a dense
# symmetric eigensolve instead of power iteration.
DENSE_EIGEN_NODES = 2000


@dataclass(frozen=True)
class HittingProfile:
    """Expected first hitting times of a target set.

    Attributes:
        target: The target set A.
        h: Expected hitting time for every node index outside A.
        F: Sum of the hitting times; 0 when A = V.
        condition: 1-norm condition estimate of I - P_A.
    """

    target: NodeSet
    h: Mapping[int, float]
    F: float
    condition: float = 1.0


def _check_target(g: Graph, a: NodeSet) -> None:
    if not a:
        raise EmptyTarget("F(∅) is not a hitting time; use the rank module's F_empty")
    if a.members[-1] >= g.N:
        raise ValueError(f"target set {a.members} has indices outside the graph")


def hitting_times(g: Graph, a: NodeSet) -> HittingProfile:
    """Solve for the expected hitting times of ``a`` from every node outside it.

    The system is solved by LU decomposition with partial pivoting.

    Raises:
        EmptyTarget: ``a`` is empty.
        SolverFailure: The solve produced a non-finite value.
    """
    _check_target(g, a)
    if len(a) == g.N:
        return HittingProfile(target=a, h={}, F=0.0)

    sub = restrict(transition_matrix(g), a)
    system = np.eye(len(sub.index)) - sub.matrix
    lu, piv = scipy.linalg.lu_factor(system, check_finite=False)
    values = scipy.linalg.lu_solve((lu, piv), np.ones(len(sub.index)), check_finite=False)

    anorm = float(np.abs(system).sum(axis=0).max())
    rcond, _ = lapack.dgecon(lu, anorm, norm="1")
    condition = math.inf if rcond == 0 else 1.0 / rcond
    if not np.all(np.isfinite(values)):
        raise SolverFailure(
            f"hitting time solve for {a.members} is not finite", condition=condition
        )
    if condition > CONDITION_WARNING:
        logger.warning("ill-conditioned hitting time system for %s (cond≈%.3g)", a.members, condition)

    h = {node: float(v) for node, v in zip(sub.index, values)}
    return HittingProfile(target=a, h=h, F=float(values.sum()), condition=condition)


class Objective:
    """Memoized F(A) for one graph.

    The cache is keyed by canonical NodeSet and may be shared by worker threads;
    a value computed twice by racing threads is identical, so the first insert wins.
    """

    def __init__(self, graph: Graph) -> None:
        self.graph = graph
        self._cache: Dict[NodeSet, float] = {}
        self._lock = threading.Lock()

    def __call__(self, a: NodeSet) -> float:
        with self._lock:
            cached = self._cache.get(a)
        if cached is not None:
            return cached
        value = hitting_times(self.graph, a).F
        with self._lock:
            return self._cache.setdefault(a, value)

    def __len__(self) -> int:
        return len(self._cache)

    def evaluate(self, sets: Iterable[NodeSet], threads: int = 1) -> List[float]:
        """Evaluate F on many sets, preserving input order."""
        return parallel_map(self, list(sets), threads)


@lru_cache(maxsize=32)
def objective_for(g: Graph) -> Objective:
    """Return the run-wide memoized objective of ``g``."""
    return Objective(g)


def objective(g: Graph, a: NodeSet) -> float:
    """Return F(a), memoized per graph and canonical set."""
    return objective_for(g)(a)


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample statistics of simulated hitting times."""

    start: int
    walks: int
    mean: float
    stderr: float


def simulate_hitting(
    g: Graph,
    a: NodeSet,
    start: int,
    walks: int,
    rng_seed: int,
    max_steps: int = MAX_WALK_STEPS,
) -> MonteCarloEstimate:
    """Estimate E_start[T_A] from independent simulated walks.

    All walks advance together; a walk stops at the first step that lands in A.

    Raises:
        StartInsideTarget: ``start`` belongs to ``a``.
        WalkCapExceeded: A walk did not reach ``a`` within ``max_steps`` steps.
    """
    _check_target(g, a)
    if start in a:
        raise StartInsideTarget(f"start node {start} is inside the target set", start=start)
    if walks < 1:
        raise ValueError("walks must be at least 1")

    rng = np.random.default_rng(rng_seed)
    degree = np.array([g.degree(i) for i in range(g.N)], dtype=np.int64)
    table = np.zeros((g.N, int(degree.max())), dtype=np.int64)
    for i, nbrs in enumerate(g.adjacency):
        table[i, : len(nbrs)] = nbrs
    in_target = np.zeros(g.N, dtype=bool)
    in_target[list(a)] = True

    position = np.full(walks, start, dtype=np.int64)
    steps = np.zeros(walks, dtype=np.int64)
    active = np.arange(walks)
    t = 0
    while active.size:
        t += 1
        if t > max_steps:
            raise WalkCapExceeded(
                f"{active.size} walk(s) exceeded {max_steps} steps", max_steps=max_steps
            )
        current = position[active]
        nxt = table[current, rng.integers(0, degree[current])]
        position[active] = nxt
        hit = in_target[nxt]
        steps[active[hit]] = t
        active = active[~hit]

    mean = float(steps.mean())
    stderr = float(steps.std(ddof=1) / math.sqrt(walks)) if walks > 1 else 0.0
    return MonteCarloEstimate(start=start, walks=walks, mean=mean, stderr=stderr)


@dataclass(frozen=True)
class SpectralRadius:
    """Dominant eigenvalue of P_A; ``iterations`` is 0 for the dense eigensolve."""

    value: float
    iterations: int
    converged: bool


def restricted_spectral_radius(
    g: Graph,
    a: NodeSet,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    dense_limit: int = DENSE_EIGEN_NODES,
) -> SpectralRadius:
    """Return the Perron eigenvalue of P_A.

    Blocks of order up to ``dense_limit`` are symmetrised as D^(1/2) P_A D^(-1/2)
    and solved exactly, reported with zero iterations. Larger blocks use power
    iteration on (I + P_A) / 2, which has the same Perron vector and a strictly
    dominant eigenvalue (1 + λ) / 2 even when the walk is periodic.

    Raises:
        EmptyTarget: ``a`` is empty.
        FullTarget: ``a`` contains every node.
    """
    restricted = restrict(transition_matrix(g), a)
    sub = restricted.matrix
    n = sub.shape[0]
    if n <= dense_limit:
        root = np.sqrt([g.degree(i) for i in restricted.index])
        symmetric = root[:, None] * sub / root[None, :]
        top = float(scipy.linalg.eigvalsh(symmetric)[-1])
        return SpectralRadius(max(0.0, top), 0, True)
    shifted = 0.5 * (np.eye(n) + sub)
    x = np.full(n, 1.0 / n)
    estimate = 0.0
    for iteration in range(1, max_iter + 1):
        y = shifted @ x
        norm = float(y.sum())
        previous, estimate = estimate, norm
        x = y / norm
        if iteration > 1 and abs(estimate - previous) < tol:
            return SpectralRadius(max(0.0, 2.0 * estimate - 1.0), iteration, True)
    logger.warning("power iteration did not converge for %s after %d steps", a.members, max_iter)
    return SpectralRadius(max(0.0, 2.0 * estimate - 1.0), max_iter, False)
