"""Command-line entry point.

Every subcommand reads an edge list, runs one part of the library and prints a
versioned JSON report (or CSV rows for the optimizer commands) on stdout. Node
sets are given and reported in the labels of the edge list.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from typing import Any, Callable, Dict, List, Optional, Sequence

from sinkopt.bounds import CurvatureReport, bound_report, elemental_curvature
from sinkopt.candidates import (
    DEFAULT_MAX_CARD,
    CandidateFamily,
    SetFamily,
    StarterMode,
    build_greedoid,
    check_greedoid,
    enumerate_family,
    g3_closure_check,
    starter_sets,
)
from sinkopt.configuration import Configuration
from sinkopt.cover import maximal_matching
from sinkopt.errors import KBelowStarterSize, NoStarters, SinkOptError
from sinkopt.graph import run_pipeline
from sinkopt.hitting import hitting_times, restricted_spectral_radius, simulate_hitting
from sinkopt.network import EMPTY_SET, Graph, NodeSet, load_graph
from sinkopt.optimizer import (
    OptimizationReport,
    Selection,
    backward_greedy,
    brute_force_oracle,
    greedy,
)
from sinkopt.rank import RankContext, RankedSet, rank_context, ranked
from sinkopt.utils import parse_labels, to_csv, to_json

logger = logging.getLogger(__name__)

CSV_HEADER = ("set", "F", "rho", "method")
CSV_COMMANDS = frozenset({"greedy", "solve", "backward", "oracle", "compare"})


# Rendering


def _set(g: Graph, nodes: NodeSet) -> List[int]:
    return g.labels(nodes)


def _ranked(g: Graph, item: RankedSet) -> Dict[str, Any]:
    return {"set": _set(g, item.nodes), "F": item.F, "rho_bar": item.rho_bar, "rho": item.rho}


def _trace(g: Graph, selection: Selection) -> List[Dict[str, Any]]:
    steps = []
    for step in selection.steps:
        entry: Dict[str, Any] = {}
        if step.removed is not None:
            entry["removed"] = g.label_of(step.removed)
        if step.added is not None:
            entry["added"] = g.label_of(step.added)
        entry["F"] = step.F
        steps.append(entry)
    return steps


def _context(g: Graph, ctx: RankContext) -> Dict[str, Any]:
    return {
        "C": ctx.C,
        "cover": _set(g, ctx.cover),
        "F_max": ctx.f_max,
        "F_min": ctx.f_min,
        "F_empty": ctx.f_empty,
        "exact_empty": ctx.exact_empty,
        "empty_part_cap": ctx.empty_part_cap,
        "rho_bar_empty": ctx.rho_bar_empty,
    }


def _report(g: Graph, report: OptimizationReport) -> Dict[str, Any]:
    body: Dict[str, Any] = {
        "K": report.K,
        "offered": _ranked(g, report.offered),
        "greedy": {**_ranked(g, report.greedy), "trace": _trace(g, report.greedy_trace)},
        "starters": [_set(g, s) for s in report.starters],
        "greedy_prefix": None if report.greedy_prefix is None else _set(g, report.greedy_prefix),
        "extensions": [
            {
                "starter": _set(g, e.start),
                "set": _set(g, e.nodes),
                "F": e.F,
                "trace": _trace(g, e),
            }
            for e in report.extensions
        ],
        "oracle": None if report.oracle is None else _ranked(g, report.oracle),
        "backward": None if report.backward is None else _ranked(g, report.backward),
        "chi": report.chi,
        "greedy_ratio": report.greedy_ratio,
        "refined": report.refined,
        "exchanged": report.exchanged,
        "offered_in_family": report.offered_in_family,
        "checks": None if report.checks is None else asdict(report.checks),
    }
    return body


def _rows(g: Graph, items: Sequence[tuple]) -> str:
    return to_csv(
        CSV_HEADER,
        ([" ".join(str(v) for v in _set(g, r.nodes)), r.F, r.rho, method] for r, method in items),
    )


def _curvature(g: Graph, report: CurvatureReport) -> Dict[str, Any]:
    arg_kappa = None
    if report.arg_kappa is not None:
        a, i, j = report.arg_kappa
        arg_kappa = {"set": _set(g, a), "i": g.label_of(i), "j": g.label_of(j)}
    arg_gamma = None
    if report.arg_gamma is not None:
        s, j = report.arg_gamma
        arg_gamma = {"set": _set(g, s), "j": g.label_of(j)}
    return {
        "kappa": report.kappa,
        "gamma": report.gamma,
        "arg_kappa": arg_kappa,
        "arg_gamma": arg_gamma,
        "increments_computed": report.increments_computed,
        "skipped_zero_denominators": report.skipped_zero_denominators,
        "gamma_scope": report.gamma_scope,
    }


def _pair(g: Graph, pair: Optional[tuple]) -> Optional[List[List[int]]]:
    return None if pair is None else [_set(g, s) for s in pair]


# Commands


def _configuration(args: argparse.Namespace, **overrides: Any) -> Configuration:
    values = {
        "nu": args.nu,
        "max_card": args.max_card,
        "starter_mode": args.mode,
        "cover_size": args.cover_size,
        "empty_part_cap": args.empty_part_cap,
        "include_greedy_prefix": args.include_greedy_prefix,
        "swap_refine": getattr(args, "swap_refine", False),
        "threads": args.threads,
        "tol": args.tol,
    }
    values.update(overrides)
    return Configuration(**values)


def _context_for(g: Graph, args: argparse.Namespace) -> RankContext:
    return rank_context(
        g,
        cover_size=getattr(args, "cover_size", None),
        max_part_size=getattr(args, "empty_part_cap", None),
        threads=args.threads,
    )


def cmd_hit(g: Graph, args: argparse.Namespace) -> str:
    target = g.nodeset(parse_labels(args.set))
    profile = hitting_times(g, target)
    body: Dict[str, Any] = {
        "target": _set(g, target),
        "h": {str(g.label_of(i)): v for i, v in sorted(profile.h.items())},
        "F": profile.F,
        "condition": profile.condition,
        "spectral_radius": None,
    }
    if len(target) < g.N:
        radius = restricted_spectral_radius(g, target)
        body["spectral_radius"] = radius.value
        body["spectral_converged"] = radius.converged
    if args.mc_walks:
        body["monte_carlo"] = {
            str(g.label_of(i)): asdict(simulate_hitting(g, target, i, args.mc_walks, args.seed))
            for i in sorted(profile.h)
        }
        for entry in body["monte_carlo"].values():
            entry["start"] = g.label_of(entry["start"])
    return to_json("hit", body)


def cmd_simulate(g: Graph, args: argparse.Namespace) -> str:
    target = g.nodeset(parse_labels(args.set))
    start = g.index_of(args.start)
    estimate = simulate_hitting(g, target, start, args.walks, args.seed)
    exact = hitting_times(g, target).h[start]
    return to_json(
        "simulate",
        {
            "target": _set(g, target),
            "start": args.start,
            "walks": estimate.walks,
            "seed": args.seed,
            "mean": estimate.mean,
            "stderr": estimate.stderr,
            "exact": exact,
            "z": None if estimate.stderr == 0 else (estimate.mean - exact) / estimate.stderr,
        },
    )


def cmd_rank(g: Graph, args: argparse.Namespace) -> str:
    ctx = _context_for(g, args)
    body = _context(g, ctx)
    if args.set is not None:
        nodes = g.nodeset(parse_labels(args.set))
        body.update(_ranked(g, ranked(g, ctx, nodes)))
    return to_json("rank", body)


def cmd_cover(g: Graph, args: argparse.Namespace) -> str:
    matching = maximal_matching(g)
    cover = NodeSet.of(v for edge in matching for v in edge)
    return to_json(
        "cover",
        {
            "matching": [[g.label_of(i), g.label_of(j)] for i, j in matching],
            "cover": _set(g, cover),
            "C": len(cover),
            "F_of_cover": hitting_times(g, cover).F,
        },
    )


def _family(g: Graph, ctx: RankContext, args: argparse.Namespace) -> CandidateFamily:
    return enumerate_family(g, ctx, args.nu, max_card=args.max_card, threads=args.threads)


def cmd_candidates(g: Graph, args: argparse.Namespace) -> str:
    ctx = _context_for(g, args)
    fam = _family(g, ctx, args)
    body: Dict[str, Any] = {
        "nu": fam.nu,
        "C": fam.C,
        "m": fam.m,
        "enumeration_cap": fam.enumeration_cap,
        "level_sizes": {str(n): c for n, c in sorted(fam.level_sizes().items())},
        "c_n": fam.rank_profile(ctx),
        "members": [
            {"set": _set(g, c.nodes), "F": c.F, "rho_bar": c.rho_bar} for c in fam.members
        ],
        "starters": None,
        "greedoid_report": None,
    }
    if fam.m is None:
        return to_json("candidates", body)

    try:
        body["starters"] = [_set(g, s) for s in starter_sets(fam, args.mode, cover=ctx.cover)]
    except NoStarters as exc:
        body["starters"] = []
        body["starter_error"] = exc.to_dict()
    axioms = check_greedoid(SetFamily.of([EMPTY_SET, *fam.sets]))
    closure = g3_closure_check(g, ctx, fam)
    construction = build_greedoid(fam, strict=False)
    body["greedoid_report"] = {
        "family": {
            "G1": axioms.g1,
            "G2": axioms.g2,
            "G2_witness": None if axioms.g2_witness is None else _set(g, axioms.g2_witness),
            "G3": axioms.g3,
            "G3_witness": _pair(g, axioms.g3_witness),
        },
        "closure": {
            "pairs_checked": closure.pairs_checked,
            "exhaustive": closure.exhaustive,
            "violations": [_pair(g, p) for p in closure.violations],
            "minimum_inaccessible": closure.minimum_inaccessible,
        },
        "construction": {
            "is_greedoid": construction.report.is_greedoid,
            "feasible_sets": len(construction.family),
            "retained": [_set(g, s) for s in construction.retained],
        },
    }
    return to_json("candidates", body)


def _ranked_selection(g: Graph, args: argparse.Namespace, selection: Selection) -> RankedSet:
    return ranked(g, _context_for(g, args), selection.nodes)


def cmd_greedy(g: Graph, args: argparse.Namespace) -> str:
    selection = greedy(g, args.k)
    item = _ranked_selection(g, args, selection)
    if args.format == "csv":
        return _rows(g, [(item, "greedy")])
    return to_json("greedy", {"K": args.k, **_ranked(g, item), "trace": _trace(g, selection)})


def cmd_backward(g: Graph, args: argparse.Namespace) -> str:
    ctx = _context_for(g, args)
    selection = backward_greedy(g, ctx.cover, args.k)
    item = ranked(g, ctx, selection.nodes)
    if args.format == "csv":
        return _rows(g, [(item, "backward")])
    return to_json(
        "backward",
        {"K": args.k, "start": _set(g, ctx.cover), **_ranked(g, item), "trace": _trace(g, selection)},
    )


def cmd_oracle(g: Graph, args: argparse.Namespace) -> str:
    selection = brute_force_oracle(g, args.k, args.threads)
    item = _ranked_selection(g, args, selection)
    if args.format == "csv":
        return _rows(g, [(item, "oracle")])
    return to_json("oracle", {"K": args.k, **_ranked(g, item)})


def _optimize(g: Graph, args: argparse.Namespace, command: str, **overrides: Any) -> str:
    configuration = _configuration(args, **overrides)
    result = run_pipeline(g, args.k, {"configurable": asdict(configuration)})
    report: OptimizationReport = result["report"]
    if args.format == "csv":
        items = [(report.offered, "starter"), (report.greedy, "greedy")]
        if report.oracle is not None:
            items.append((report.oracle, "oracle"))
        if report.backward is not None:
            items.append((report.backward, "backward"))
        return _rows(g, items)
    family = result["family"]
    body = {
        "nu": configuration.nu,
        "m": family.m,
        "starter_source": result["starter_source"],
        **_report(g, report),
    }
    return to_json(command, body)


def cmd_solve(g: Graph, args: argparse.Namespace) -> str:
    return _optimize(g, args, "solve")


def cmd_compare(g: Graph, args: argparse.Namespace) -> str:
    return _optimize(
        g, args, "compare", with_oracle=args.with_oracle, with_backward=args.with_backward
    )


def _curvature_report(g: Graph, ctx: RankContext, args: argparse.Namespace) -> CurvatureReport:
    fam = _family(g, ctx, args)
    return elemental_curvature(g, ctx, fam, threads=args.threads)


def cmd_curvature(g: Graph, args: argparse.Namespace) -> str:
    ctx = _context_for(g, args)
    report = _curvature_report(g, ctx, args)
    return to_json("curvature", {"nu": args.nu, "C": ctx.C, **_curvature(g, report)})


def cmd_bounds(g: Graph, args: argparse.Namespace) -> str:
    ctx = _context_for(g, args)
    curvature = _curvature_report(g, ctx, args)
    rho_greedy = ranked(g, ctx, greedy(g, args.k).nodes).rho
    rho_offered = chi = None
    try:
        result = run_pipeline(g, args.k, {"configurable": asdict(_configuration(args))})
        rho_offered, chi = result["report"].offered.rho, result["report"].chi
    except (KBelowStarterSize, NoStarters) as exc:
        logger.warning("starter method not run: %s", exc)
    report = bound_report(ctx, curvature, args.k, args.nu, rho_greedy, rho_offered, chi)
    chi_bound = report.chi_bound
    return to_json(
        "bounds",
        {
            "K": report.K,
            "nu": report.nu,
            "C": ctx.C,
            "kappa": report.kappa,
            "gamma": report.gamma,
            "gamma_scope": curvature.gamma_scope,
            "r": report.r,
            "eta_bar": report.eta_bar,
            "eta": report.eta,
            "m_of_nu": report.m_of_nu,
            "rho_greedy": rho_greedy,
            "rho_offered": rho_offered,
            "chi": chi,
            "delta": None if chi_bound is None else chi_bound.delta,
            "chi_lower": None if chi_bound is None else chi_bound.chi_lower,
            "preconditions": {
                "eta_positive": report.eta > 0,
                "greedy_in_range": None if chi_bound is None else chi_bound.preconditions_met,
                "greedy_below": report.greedy_below,
                "offered_above_eta": report.offered_above_eta,
                "chi_exceeds_lower": report.chi_exceeds_lower,
            },
        },
    )


COMMANDS: Dict[str, Callable[[Graph, argparse.Namespace], str]] = {
    "hit": cmd_hit,
    "rank": cmd_rank,
    "cover": cmd_cover,
    "candidates": cmd_candidates,
    "greedy": cmd_greedy,
    "solve": cmd_solve,
    "backward": cmd_backward,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "curvature": cmd_curvature,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
}


# Parser


def _add_context_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cover-size", type=int, default=None, help="size of the reference vertex cover")
    p.add_argument(
        "--empty-part-cap", type=int, default=None, help="largest part size when computing F(∅)"
    )


def _add_family_flags(p: argparse.ArgumentParser, nu_required: bool = False) -> None:
    p.add_argument("--nu", type=float, default=None if nu_required else 0.8, required=nu_required)
    p.add_argument("--max-card", type=int, default=DEFAULT_MAX_CARD)
    p.add_argument(
        "--mode",
        choices=[m.value for m in StarterMode],
        default=StarterMode.ALL_MINIMUM.value,
        help="how starters are drawn from the smallest members",
    )


def _add_solver_flags(p: argparse.ArgumentParser, nu_required: bool = False) -> None:
    _add_family_flags(p, nu_required)
    _add_context_flags(p)
    p.add_argument(
        "--include-greedy-prefix",
        action="store_true",
        help="add the first m greedy choices to the starters",
    )


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser for every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", required=True, help="edge list file, one 'u v' pair per line")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--threads", type=int, default=1, help="worker threads (0 = all CPUs)")
    common.add_argument("--tol", type=float, default=1e-9, help="tolerance for guarantee checks")
    common.add_argument("-v", "--verbose", action="store_true", help="log debug output to stderr")

    parser = argparse.ArgumentParser(
        prog="sinkopt", description="Choose target sets that minimise random-walk hitting times."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hit", parents=[common], help="hitting times of a target set")
    p.add_argument("--set", required=True, help="comma-separated node labels")
    p.add_argument("--mc-walks", type=int, default=0, help="also simulate this many walks")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo hitting time estimate")
    p.add_argument("--set", required=True, help="comma-separated node labels")
    p.add_argument("--start", type=int, required=True, help="label of the start node")
    p.add_argument("--walks", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("rank", parents=[common], help="normalisation constants and ranks")
    _add_context_flags(p)
    p.add_argument("--set", default=None, help="comma-separated node labels to rank")

    sub.add_parser("cover", parents=[common], help="maximal matching and its vertex cover")

    p = sub.add_parser("candidates", parents=[common], help="near-optimal family L(nu, C)")
    _add_family_flags(p, nu_required=True)
    _add_context_flags(p)

    for name, text in (
        ("greedy", "classic greedy set"),
        ("oracle", "brute-force optimum"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--k", type=int, required=True)
        _add_context_flags(p)

    p = sub.add_parser("backward", parents=[common], help="backward greedy from the cover")
    p.add_argument("--k", type=int, required=True)
    _add_context_flags(p)

    p = sub.add_parser("solve", parents=[common], help="starter-set method")
    p.add_argument("--k", type=int, required=True)
    _add_solver_flags(p)
    p.add_argument("--swap-refine", action="store_true", help="run single-node exchanges on S*")

    p = sub.add_parser("compare", parents=[common], help="starter-set method against baselines")
    p.add_argument("--k", type=int, required=True)
    _add_solver_flags(p)
    p.add_argument("--swap-refine", action="store_true", help="run single-node exchanges on S*")
    p.add_argument("--with-oracle", action="store_true", help="also compute the exact optimum")
    p.add_argument(
        "--with-backward", action="store_true", help="also run backward greedy from the cover"
    )

    p = sub.add_parser("curvature", parents=[common], help="elemental curvature and gamma")
    _add_family_flags(p, nu_required=True)
    _add_context_flags(p)

    p = sub.add_parser("bounds", parents=[common], help="rank bounds, m(nu) and chi bound")
    p.add_argument("--k", type=int, required=True)
    _add_solver_flags(p, nu_required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format == "csv" and args.command not in CSV_COMMANDS:
        parser.error(f"--format csv is only available for: {', '.join(sorted(CSV_COMMANDS))}")

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        g, _ = load_graph(args.graph)
        output = COMMANDS[args.command](g, args)
    except SinkOptError as exc:
        sys.stderr.write(to_json(args.command, {"error": exc.to_dict()}))
        return 1
    except (ValueError, OSError) as exc:
        code = "io_error" if isinstance(exc, OSError) else "invalid_argument"
        sys.stderr.write(to_json(args.command, {"error": {"code": code, "message": str(exc)}}))
        return 1
    sys.stdout.write(output)
    return 0
