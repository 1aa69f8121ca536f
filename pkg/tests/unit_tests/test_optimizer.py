from itertools import combinations

import pytest

from sinkopt.candidates import enumerate_family, starter_sets
from sinkopt.errors import NoStarters, StarterTooLarge, TargetTooSmall, TooLarge, ZeroGreedyRank
from sinkopt.network import NodeSet
from sinkopt.optimizer import (
    GREEDY_RATIO,
    OptimizationReport,
    backward_greedy,
    brute_force_oracle,
    compare,
    greedy,
    greedy_extend,
    improvement_factor,
    solve_starter,
    swap_refine,
)
from sinkopt.rank import rank_context, ranked


def test_greedy_p3(p3) -> None:
    first = greedy(p3, 1)
    assert first.nodes == p3.nodeset([2])
    assert first.F == pytest.approx(2.0)
    second = greedy(p3, 2)
    assert second.nodes == p3.nodeset([1, 2])
    assert [step.F for step in second.steps] == pytest.approx([2.0, 1.0])


def test_greedy_breaks_ties_by_label(k4) -> None:
    selection = greedy(k4, 1)
    assert selection.nodes == k4.nodeset([1])
    assert selection.F == pytest.approx(9.0)


def test_greedy_trace_is_non_increasing(lollipop) -> None:
    values = [step.F for step in greedy(lollipop, lollipop.N - 1).steps]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))


def test_greedy_extend(c4, p3) -> None:
    assert greedy_extend(c4, c4.nodeset([1]), 2).nodes == c4.nodeset([1, 3])
    assert greedy_extend(p3, p3.nodeset([2]), 2).nodes == p3.nodeset([1, 2])
    same = greedy_extend(c4, c4.nodeset([1, 3]), 2)
    assert same.nodes == c4.nodeset([1, 3])
    assert same.steps == ()
    with pytest.raises(StarterTooLarge):
        greedy_extend(c4, c4.nodeset([1, 2, 3]), 2)


def test_solve_starter_tie_break(p3) -> None:
    starters = [p3.nodeset([1, 2]), p3.nodeset([1, 3]), p3.nodeset([2, 3])]
    solution = solve_starter(p3, starters, 2)
    assert solution.offered.nodes == p3.nodeset([1, 2])
    assert len(solution.extensions) == 3


def test_solve_starter_is_thread_independent(lollipop) -> None:
    starters = [NodeSet(c) for c in combinations(range(lollipop.N), 2)]
    one = solve_starter(lollipop, starters, 4, threads=1)
    many = solve_starter(lollipop, starters, 4, threads=8)
    assert one == many


def test_solve_starter_requires_starters(p3) -> None:
    with pytest.raises(NoStarters):
        solve_starter(p3, [], 2)


def test_backward_greedy(c4, p3) -> None:
    shrunk = backward_greedy(c4, c4.vertices(), 2)
    assert shrunk.nodes == c4.nodeset([2, 4])
    assert [step.removed for step in shrunk.steps] == [0, 2]
    assert backward_greedy(p3, p3.nodeset([1, 2]), 1).nodes == p3.nodeset([2])
    with pytest.raises(TargetTooSmall):
        backward_greedy(p3, p3.nodeset([1, 2]), 2)


def test_oracle(p3, c4) -> None:
    assert brute_force_oracle(p3, 1).nodes == p3.nodeset([2])
    best = brute_force_oracle(c4, 2)
    assert best.nodes == c4.nodeset([1, 3])
    assert best.F == pytest.approx(2.0)
    assert brute_force_oracle(c4, 4).F == 0.0
    with pytest.raises(TooLarge):
        brute_force_oracle(c4, 2, limit=5)


def test_swap_refine_reaches_local_optimum(c4) -> None:
    start = greedy_extend(c4, c4.nodeset([1, 2]), 2)
    refined = swap_refine(c4, start)
    assert refined.F == pytest.approx(2.0)
    assert len(refined.nodes) == 2
    assert refined.steps[-1].removed is not None


def test_swap_refine_pool_restricts_moves(c4) -> None:
    start = greedy_extend(c4, c4.nodeset([1, 2]), 2)
    stuck = swap_refine(c4, start, pool=c4.nodeset([1, 2]))
    assert stuck.nodes == c4.nodeset([1, 2])


def test_improvement_factor() -> None:
    assert improvement_factor(1.5, 1.2) == pytest.approx(0.25)
    assert improvement_factor(0.7, 0.7) == 0.0
    with pytest.raises(ZeroGreedyRank):
        improvement_factor(1.0, 0.0)


def _report(g, k, nu):
    ctx = rank_context(g)
    fam = enumerate_family(g, ctx, nu, max_card=min(k, ctx.C))
    starters = starter_sets(fam)
    baseline = greedy(g, k)
    prefix = NodeSet.of(step.added for step in baseline.steps[: fam.m])
    if prefix not in starters:
        starters = sorted([*starters, prefix])
    solution = solve_starter(g, starters, k)
    oracle = brute_force_oracle(g, k)
    report = OptimizationReport(
        K=k,
        offered=ranked(g, ctx, solution.offered.nodes),
        greedy=ranked(g, ctx, baseline.nodes),
        greedy_trace=baseline,
        starters=tuple(starters),
        extensions=solution.extensions,
        greedy_prefix=prefix,
        oracle=ranked(g, ctx, oracle.nodes),
    )
    return report, ctx


def test_compare_p3(p3) -> None:
    report, ctx = _report(p3, 2, 0.8)
    comparison = compare(report, ctx)
    assert comparison.chi == pytest.approx(0.0)
    assert comparison.checks.lemma2_precondition
    assert comparison.checks.corollary1
    assert comparison.checks.oracle_dominance


def test_guarantees_on_fixtures(fixture_graphs) -> None:
    for g in fixture_graphs:
        ctx = rank_context(g)
        for k in range(1, min(4, ctx.C) + 1):
            fam = enumerate_family(g, ctx, 0.8, max_card=k)
            if fam.m is None:
                continue
            report, ctx = _report(g, k, 0.8)
            checks = compare(report, ctx).checks
            assert checks.lemma2, (g, k)
            assert checks.corollary1, (g, k)
            assert checks.nemhauser, (g, k)
            assert checks.oracle_dominance, (g, k)
            assert report.offered.rho >= GREEDY_RATIO * report.oracle.rho - 1e-9
