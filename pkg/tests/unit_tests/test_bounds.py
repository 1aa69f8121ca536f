import pytest

from sinkopt.bounds import (
    CurvatureReport,
    bound_report,
    chi_lower_bound,
    cover_subsets,
    curvature_of,
    elemental_curvature,
    m_of_nu,
    max_increment,
    r_of_nu,
    rank_increment,
    rank_lower_bound,
    verify_guarantees,
)
from sinkopt.candidates import enumerate_family
from sinkopt.errors import ElementInSet, NonPositiveEta, NoValidPairs
from sinkopt.network import EMPTY_SET, NodeSet
from sinkopt.rank import RankContext, rank_context


def test_rank_increment_p3(p3) -> None:
    ctx = rank_context(p3)
    # rho_2({1}) = (F({1}) - F({1, 2})) / 6 = (7 - 1) / 6
    assert rank_increment(p3, ctx, p3.nodeset([1]), 1) == pytest.approx(1.0)
    # From the empty set the increment uses F(∅) = 13.
    assert rank_increment(p3, ctx, EMPTY_SET, 1) == pytest.approx(11 / 6)
    with pytest.raises(ElementInSet):
        rank_increment(p3, ctx, p3.nodeset([2]), 1)


def test_modular_rank_has_unit_curvature() -> None:
    kappa, witness, computed, skipped = curvature_of(
        lambda s: float(len(s)), [NodeSet((0,)), NodeSet((1, 2))], 4
    )
    assert kappa == pytest.approx(1.0)
    assert witness == (NodeSet((0,)), 1, 2)
    assert skipped == 0
    assert computed == 6 + 2


def test_curvature_without_pairs_fails() -> None:
    with pytest.raises(NoValidPairs):
        curvature_of(lambda s: 0.0, [NodeSet((0,))], 3)


def test_curvature_of_full_family_fails(c4) -> None:
    ctx = rank_context(c4)
    with pytest.raises(NoValidPairs):
        elemental_curvature(c4, ctx, [c4.vertices()])


def test_elemental_curvature_p3(p3) -> None:
    ctx = rank_context(p3)
    fam = enumerate_family(p3, ctx, 0.8)
    report = elemental_curvature(p3, ctx, fam)
    assert 0.0 <= report.kappa <= 1.0 + 1e-9
    assert report.arg_kappa[0] in fam
    assert report.gamma_scope == "cover-subsets"
    # gamma over S = {1}, {2} inside the cover {1, 2}.
    assert report.gamma == pytest.approx(1.0)
    assert report.arg_gamma == (p3.nodeset([1]), 1)


def test_rank_lower_bound() -> None:
    assert rank_lower_bound(0.3, 0.4, 0) == 1.0
    assert rank_lower_bound(1.0, 0.2, 3) == pytest.approx(0.4)
    assert rank_lower_bound(0.5, 0.2, 2) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        rank_lower_bound(0.5, 1.5, 1)


def test_m_of_nu() -> None:
    assert r_of_nu(0.5, 0.2, 0.75, 4) == 1
    assert m_of_nu(0.5, 0.2, 0.75, 4) == 3
    assert m_of_nu(0.5, 0.5, 0.9, 5) == 5
    assert m_of_nu(0.0, 0.01, 0.5, 6) == 1


def test_chi_lower_bound() -> None:
    bound = chi_lower_bound(0.5, 0.25)
    assert bound.preconditions_met
    assert bound.delta == pytest.approx(0.5)
    assert bound.chi_lower == pytest.approx(1.0)
    assert not chi_lower_bound(0.5, 0.6).preconditions_met
    with pytest.raises(NonPositiveEta):
        chi_lower_bound(0.0, 0.1)


def test_bound_report_flags(p3) -> None:
    ctx = rank_context(p3)
    fam = enumerate_family(p3, ctx, 0.8)
    curvature = elemental_curvature(p3, ctx, fam)
    report = bound_report(ctx, curvature, 2, 0.8, rho_greedy=2.0, rho_offered=2.0, chi=0.0)
    assert report.r == 0
    assert report.eta_bar == 1.0
    assert report.eta == pytest.approx(2.0)
    assert report.greedy_below is False
    assert report.chi_exceeds_lower is None


# Concave in the cardinality, with increments 0.5, 0.3 and 0.2.
CONCAVE_RANK = (0.0, 0.5, 0.8, 1.0)


def concave_rank(nodes: NodeSet) -> float:
    return CONCAVE_RANK[len(nodes)]


def test_chi_bound_on_concave_rank() -> None:
    cover = NodeSet((0, 1, 2))
    kappa, witness, computed, skipped = curvature_of(
        concave_rank, [NodeSet((i,)) for i in cover], 3
    )
    gamma, arg_gamma = max_increment(concave_rank, cover_subsets(cover), cover)
    assert kappa == pytest.approx(2 / 3)
    assert gamma == pytest.approx(0.3)
    assert rank_lower_bound(kappa, gamma, 1) == pytest.approx(0.7)

    ctx = RankContext(
        C=3, cover=cover, f_max=10.0, f_min=0.0, f_empty=10.0, exact_empty=True, empty_part_cap=2
    )
    curvature = CurvatureReport(
        kappa=kappa,
        gamma=gamma,
        arg_kappa=witness,
        arg_gamma=arg_gamma,
        increments_computed=computed,
        skipped_zero_denominators=skipped,
    )
    # A greedy rank below eta and an offered rank above it.
    rho_greedy, rho_offered = 0.56, CONCAVE_RANK[2]
    chi = rho_offered / rho_greedy - 1
    report = bound_report(ctx, curvature, 2, 0.5, rho_greedy, rho_offered, chi)
    assert report.r == 1
    assert report.eta == pytest.approx(0.7)
    assert report.chi_bound is not None
    assert report.chi_bound.preconditions_met
    assert report.chi_bound.delta == pytest.approx(0.2)
    assert report.chi_bound.chi_lower == pytest.approx(0.25)
    assert report.offered_above_eta is True
    assert report.chi_exceeds_lower is True
    delta = report.chi_bound.delta
    assert chi > delta / (1 - delta)


def test_cover_subsets(c4) -> None:
    subsets = cover_subsets(c4.vertices())
    assert len(subsets) == 2**4 - 2
    assert subsets[0] == NodeSet((0,))


def test_guarantees_on_small_graphs(p3, c4, star3, lollipop) -> None:
    for g, k in ((p3, 2), (c4, 2), (star3, 2), (lollipop, 3)):
        ctx = rank_context(g)
        findings = verify_guarantees(g, ctx, k, 0.8)
        assert findings.telescoping_violations == ()
        assert findings.curvature_violations == ()
        assert findings.rank_bound_violations == ()
        assert findings.chains_checked >= findings.rank_bound_checked


@pytest.mark.slow
def test_guarantees_on_atlas(atlas) -> None:
    for g in atlas(6):
        ctx = rank_context(g)
        findings = verify_guarantees(g, ctx, min(2, g.N), 0.8)
        assert findings.clean, g
