"""Define the starter-set optimizer as a compiled state graph.

The pipeline fixes the rank context, enumerates the near-optimal family, picks
the starters, extends each of them greedily to K nodes and compares the best
extension against classic greedy and, optionally, the exact optimum.
"""

import asyncio
import logging
from dataclasses import replace
from typing import Any, Dict, List, Literal, Optional

from langchain_core.runnables import RunnableConfig
from langgraph.graph import StateGraph

from sinkopt.candidates import StarterMode, enumerate_family, in_family, starter_sets
from sinkopt.configuration import Configuration
from sinkopt.errors import ConfigurationError, KBelowStarterSize, NoStarters
from sinkopt.network import Graph, NodeSet
from sinkopt.optimizer import (
    OptimizationReport,
    Selection,
    backward_greedy,
    best_selection,
    brute_force_oracle,
    compare,
    greedy,
    greedy_extend,
    swap_refine,
)
from sinkopt.rank import rank_context, ranked
from sinkopt.state import InputState, State
from sinkopt.utils import resolve_threads

logger = logging.getLogger(__name__)


async def build_context(state: State, config: RunnableConfig) -> Dict[str, Any]:
    """Fix C, F_max, F_min and F(∅) from the reference vertex cover."""
    configuration = Configuration.from_runnable_config(config)
    g = state.network
    if not 1 <= state.k <= g.N:
        raise ConfigurationError(f"K must lie in [1, {g.N}], got {state.k}", field="k")
    ctx = await asyncio.to_thread(
        rank_context,
        g,
        cover_size=configuration.cover_size,
        max_part_size=configuration.empty_part_cap,
        threads=configuration.threads,
    )
    logger.info("reference cover has C=%d nodes, F_min=%g", ctx.C, ctx.f_min)
    return {"context": ctx, "cover": ctx.cover}


async def enumerate_candidates(state: State, config: RunnableConfig) -> Dict[str, Any]:
    """Enumerate the members of L(nu, C) up to the configured cardinality."""
    configuration = Configuration.from_runnable_config(config)
    assert state.context is not None
    family = await asyncio.to_thread(
        enumerate_family,
        state.network,
        state.context,
        configuration.nu,
        max_card=configuration.max_card,
        threads=configuration.threads,
        limit=configuration.enumeration_limit,
    )
    logger.info("family has %d member(s), m=%s", len(family), family.m)
    return {"family": family}


async def select_starters(state: State, config: RunnableConfig) -> Dict[str, Any]:
    """Choose the starters and run classic greedy for the baseline and the prefix.

    A mode that selects nothing falls back to every minimum-cardinality member.
    """
    configuration = Configuration.from_runnable_config(config)
    family = state.family
    assert family is not None
    mode = configuration.mode
    try:
        starters = starter_sets(family, mode, cover=state.cover)
        source = mode.value
    except NoStarters:
        if mode is StarterMode.ALL_MINIMUM:
            raise
        logger.warning("%s selected no starters; falling back to all-minimum", mode.value)
        starters = starter_sets(family, StarterMode.ALL_MINIMUM)
        source = StarterMode.ALL_MINIMUM.value

    m = family.m
    assert m is not None
    if state.k < m:
        raise KBelowStarterSize(
            f"K={state.k} is below the starter size m={m}; use the backward subcommand "
            "to shrink the reference cover instead",
            K=state.k,
            m=m,
        )

    baseline = await asyncio.to_thread(greedy, state.network, state.k)
    prefix = NodeSet.of(step.added for step in baseline.steps[:m] if step.added is not None)
    if configuration.include_greedy_prefix and prefix not in starters:
        starters = sorted([*starters, prefix])
        source += "+greedy-prefix"
    return {
        "starters": starters,
        "starter_source": source,
        "greedy": baseline,
        "greedy_prefix": prefix,
    }


async def extend_starters(state: State, config: RunnableConfig) -> Dict[str, Any]:
    """Extend every starter greedily to K nodes and offer the best extension."""
    configuration = Configuration.from_runnable_config(config)
    semaphore = asyncio.Semaphore(resolve_threads(configuration.threads))

    async def extend(starter: NodeSet) -> Selection:
        async with semaphore:
            return await asyncio.to_thread(greedy_extend, state.network, starter, state.k)

    extensions: List[Selection] = list(
        await asyncio.gather(*(extend(s) for s in state.starters))
    )
    return {"extensions": extensions, "offered": best_selection(extensions)}


async def refine_offered(state: State, config: RunnableConfig) -> Dict[str, Any]:
    """Improve the offered set by single-node exchanges."""
    configuration = Configuration.from_runnable_config(config)
    assert state.offered is not None
    refined = await asyncio.to_thread(
        swap_refine, state.network, state.offered, configuration.threads
    )
    return {"offered": refined}


async def compare_baselines(state: State, config: RunnableConfig) -> Dict[str, Any]:
    """Rank the offered set against greedy, the optimum and backward greedy."""
    configuration = Configuration.from_runnable_config(config)
    g, ctx, k = state.network, state.context, state.k
    assert ctx is not None and state.offered is not None and state.greedy is not None

    oracle: Optional[Selection] = None
    if configuration.with_oracle:
        oracle = await asyncio.to_thread(brute_force_oracle, g, k, configuration.threads)

    offered = state.offered
    backward = None
    exchanged = False
    if configuration.with_backward:
        if ctx.C > k:
            shrunk = await asyncio.to_thread(backward_greedy, g, ctx.cover, k)
            backward = ranked(g, ctx, shrunk.nodes)
            if backward.rho > ranked(g, ctx, offered.nodes).rho:
                moved = await asyncio.to_thread(
                    swap_refine, g, offered, configuration.threads, backward.nodes
                )
                exchanged = moved.nodes != offered.nodes
                offered = moved
        else:
            logger.info("backward greedy skipped: cover of %d nodes is not above K=%d", ctx.C, k)

    report = OptimizationReport(
        K=k,
        offered=ranked(g, ctx, offered.nodes),
        greedy=ranked(g, ctx, state.greedy.nodes),
        greedy_trace=state.greedy,
        starters=tuple(state.starters),
        extensions=tuple(state.extensions),
        greedy_prefix=state.greedy_prefix,
        oracle=None if oracle is None else ranked(g, ctx, oracle.nodes),
        backward=backward,
        refined=state.offered.nodes != best_selection(state.extensions).nodes,
        exchanged=exchanged,
        offered_in_family=in_family(g, ctx, configuration.nu, offered.nodes),
    )
    comparison = compare(report, ctx, configuration.tol)
    report = replace(
        report,
        chi=comparison.chi,
        greedy_ratio=comparison.greedy_ratio,
        checks=comparison.checks,
    )
    if not comparison.checks.lemma2:
        logger.warning("offered set is worse than greedy at K=%d", k)
    return {"offered": offered, "oracle": oracle, "report": report}


# Define a new graph

builder = StateGraph(State, input=InputState, config_schema=Configuration)

builder.add_node(build_context)
builder.add_node(enumerate_candidates)
builder.add_node(select_starters)
builder.add_node(extend_starters)
builder.add_node(refine_offered)
builder.add_node(compare_baselines)

builder.add_edge("__start__", "build_context")
builder.add_edge("build_context", "enumerate_candidates")
builder.add_edge("enumerate_candidates", "select_starters")
builder.add_edge("select_starters", "extend_starters")


def route_extensions(
    state: State, config: RunnableConfig
) -> Literal["refine_offered", "compare_baselines"]:
    """Send the offered set through the exchange post-pass when it is enabled.

    Args:
        state (State): The current pipeline state.
        config (RunnableConfig): Configuration for the run.

    Returns:
        str: The name of the next node to call.
    """
    if Configuration.from_runnable_config(config).swap_refine:
        return "refine_offered"
    return "compare_baselines"


builder.add_conditional_edges("extend_starters", route_extensions)
builder.add_edge("refine_offered", "compare_baselines")
builder.add_edge("compare_baselines", "__end__")

graph = builder.compile(
    interrupt_before=[],
    interrupt_after=[],
)

graph.name = "Starter Set Optimizer"


async def arun_pipeline(
    network: Graph, k: int, config: Optional[RunnableConfig] = None
) -> Dict[str, Any]:
    """Run the pipeline and return its final state values."""
    return await graph.ainvoke({"network": network, "k": k}, config)


def run_pipeline(
    network: Graph, k: int, config: Optional[RunnableConfig] = None
) -> Dict[str, Any]:
    """Synchronous wrapper around :func:`arun_pipeline`."""
    return asyncio.run(arun_pipeline(network, k, config))
