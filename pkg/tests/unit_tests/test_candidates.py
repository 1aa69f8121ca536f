import pytest

from sinkopt.candidates import (
    Candidate,
    CandidateFamily,
    SetFamily,
    StarterMode,
    build_greedoid,
    check_greedoid,
    enumerate_family,
    g3_closure_check,
    in_family,
    starter_sets,
)
from sinkopt.errors import ConstructionFailed, NoStarters, TooLarge
from sinkopt.network import EMPTY_SET, NodeSet
from sinkopt.rank import rank_context


def _family(*sets):
    return SetFamily.of(NodeSet.of(s) for s in sets)


def test_p3_family_at_point_eight(p3) -> None:
    ctx = rank_context(p3)
    fam = enumerate_family(p3, ctx, 0.8, max_card=2)
    assert fam.m == 1
    assert fam.sets == (
        p3.nodeset([2]),
        p3.nodeset([1, 2]),
        p3.nodeset([1, 3]),
        p3.nodeset([2, 3]),
    )
    assert fam.members[0].rho_bar == pytest.approx(5 / 6)
    assert all(c.rho_bar == pytest.approx(1.0) for c in fam.members[1:])
    assert fam.level_sizes() == {1: 1, 2: 3}


def test_p3_family_at_one(p3) -> None:
    ctx = rank_context(p3)
    fam = enumerate_family(p3, ctx, 1.0, max_card=2)
    assert fam.m == 2
    assert len(fam) == 3
    assert starter_sets(fam, StarterMode.COVER_SUBSETS, cover=ctx.cover) == [p3.nodeset([1, 2])]
    assert starter_sets(fam, StarterMode.ALL_MINIMUM) == list(fam.sets)


def test_small_threshold_admits_every_pair(c4) -> None:
    # Singletons of C4 all attain F_max, so their rank is exactly zero.
    ctx = rank_context(c4)
    fam = enumerate_family(c4, ctx, 1e-3, max_card=2)
    assert fam.m == 2
    assert len(fam) == 6


def test_max_card_is_clamped_to_cover(p3) -> None:
    ctx = rank_context(p3)
    fam = enumerate_family(p3, ctx, 0.8, max_card=3)
    assert fam.enumeration_cap == 2


def test_all_minimum_starters(p3) -> None:
    fam = enumerate_family(p3, rank_context(p3), 0.8)
    assert starter_sets(fam) == [p3.nodeset([2])]


def test_empty_family_has_no_starters(p3) -> None:
    fam = enumerate_family(p3, rank_context(p3), 1.0, max_card=1)
    assert fam.m is None
    assert len(fam) == 0
    with pytest.raises(NoStarters):
        starter_sets(fam)


def test_enumeration_limit(c4) -> None:
    with pytest.raises(TooLarge):
        enumerate_family(c4, rank_context(c4), 0.5, max_card=2, limit=5)


def test_rank_profile(p3) -> None:
    ctx = rank_context(p3)
    fam = enumerate_family(p3, ctx, 0.8)
    assert fam.rank_profile(ctx) == pytest.approx([0.0, 11 / 6, 2.0])


def test_membership(p3) -> None:
    ctx = rank_context(p3)
    fam = enumerate_family(p3, ctx, 0.8)
    assert p3.nodeset([2]) in fam
    assert p3.nodeset([1]) not in fam
    assert in_family(p3, ctx, 0.8, p3.nodeset([1, 3]))
    assert not in_family(p3, ctx, 0.8, EMPTY_SET)


def test_greedoid_axioms_hold() -> None:
    report = check_greedoid(_family([], [1], [2], [1, 2]))
    assert report.is_greedoid


def test_greedoid_accessibility_witness() -> None:
    report = check_greedoid(_family([], [1, 2]))
    assert report.g1
    assert not report.g2
    assert report.g2_witness == NodeSet((1, 2))


def test_greedoid_needs_empty_set() -> None:
    report = check_greedoid(_family([1]))
    assert not report.g1


def test_set_family_rejects_duplicates() -> None:
    with pytest.raises(ValueError):
        SetFamily((NodeSet((1,)), NodeSet((1,))))


def test_minimum_members_are_not_accessible(p3) -> None:
    # The smallest members of L lose their rank when any node is removed.
    ctx = rank_context(p3)
    fam = enumerate_family(p3, ctx, 1.0)
    report = check_greedoid(SetFamily.of([EMPTY_SET, *fam.sets]))
    assert not report.g2
    assert report.g2_witness == p3.nodeset([1, 2])
    assert g3_closure_check(p3, ctx, fam).minimum_inaccessible


def test_closure_holds_on_fixtures(fixture_graphs) -> None:
    for g in fixture_graphs:
        if g.N > 8:
            continue
        ctx = rank_context(g)
        for nu in (0.5, 0.8, 1.0):
            fam = enumerate_family(g, ctx, nu)
            if fam.m is None:
                continue
            report = g3_closure_check(g, ctx, fam)
            assert report.exhaustive
            assert report.violations == ()


def test_closure_sampling_is_seeded(c4) -> None:
    ctx = rank_context(c4)
    fam = enumerate_family(c4, ctx, 0.3, max_card=3)
    a = g3_closure_check(c4, ctx, fam, trials=5, rng_seed=1)
    b = g3_closure_check(c4, ctx, fam, trials=5, rng_seed=1)
    assert not a.exhaustive
    assert a == b
    assert a.pairs_checked == 5


def test_build_greedoid_from_single_starter(p3) -> None:
    fam = enumerate_family(p3, rank_context(p3), 0.8)
    built = build_greedoid(fam)
    assert built.report.is_greedoid
    assert built.retained == (p3.nodeset([2]),)
    assert set(built.family) == {
        EMPTY_SET,
        p3.nodeset([2]),
        p3.nodeset([1, 2]),
        p3.nodeset([2, 3]),
    }


def test_build_greedoid_uniform(p3) -> None:
    fam = enumerate_family(p3, rank_context(p3), 1.0)
    built = build_greedoid(fam)
    assert built.report.is_greedoid
    assert len(built.family) == 7
    assert starter_sets(fam, StarterMode.GREEDOID_FEASIBLE) == list(fam.sets)


@pytest.mark.slow
def test_closure_on_atlas(atlas) -> None:
    for g in atlas(7):
        ctx = rank_context(g)
        for nu in (0.5, 0.8, 1.0):
            fam = enumerate_family(g, ctx, nu)
            if fam.m is not None:
                assert g3_closure_check(g, ctx, fam).violations == ()


def test_strict_construction_fails_without_augmentation() -> None:
    # Two disjoint pairs: neither can be augmented from the other's singletons.
    fam = CandidateFamily(
        nu=0.5,
        C=4,
        members=(
            Candidate(NodeSet((0, 1)), 1.0, 0.9),
            Candidate(NodeSet((2, 3)), 1.0, 0.9),
        ),
        m=2,
        enumeration_cap=2,
    )
    with pytest.raises(ConstructionFailed) as info:
        build_greedoid(fam, strict=True)
    assert info.value.code == "construction_failed"
    assert info.value.details["g3"] is False
    assert info.value.details["g3_witness"] == [[0, 1], [2]]

    lenient = build_greedoid(fam, strict=False)
    assert lenient.report.is_greedoid
    assert lenient.retained == (NodeSet((0, 1)),)
