"""Partial recall: splits, bounded-split enumeration, and the exhaustive
best-refinement search."""

from fractions import Fraction

import pytest

from irgames.game import validate_game
from irgames.generators import (
    gen_fig2,
    gen_fig5,
    gen_fig5_split,
    gen_random,
    gen_x3c_game,
)
from irgames.partial import (
    SplitStep,
    apply_split,
    edt_nash_partial_regression,
    enumerate_k_refinements,
    is_partial_refinement,
    k_best_partial,
)
from irgames.recall import perfect_recall_refinement
from irgames.solvers import CapExceededError, optimal_strategy


def test_is_partial_refinement_endpoints():
    g = gen_fig5()
    assert is_partial_refinement(g, g, 1)
    pr, _ = perfect_recall_refinement(g, 1)
    assert is_partial_refinement(pr, g, 1)
    assert is_partial_refinement(gen_fig5_split(), g, 1)


def test_split_crossing_observation_classes_is_rejected():
    # in fig2 the first-visit pair {a, w} may not be separated from the
    # revisit {b} arbitrarily: grouping a with b crosses obs classes
    g = gen_fig2()
    step = SplitStep(player=1, infoset_id="I", part_a=("a", "b"), part_b=("w",))
    with pytest.raises(ValueError, match="not recall-consistent"):
        apply_split(g, step)


def test_apply_split_fig5_reproduces_the_published_refinement():
    g = gen_fig5()
    step = SplitStep(player=1, infoset_id="I", part_a=("r",), part_b=("a", "b"))
    refined = apply_split(g, step)
    assert validate_game(refined) == []
    parts = {frozenset(i.nodes) for i in refined.infosets[1].values()}
    assert parts == {frozenset({"r"}), frozenset({"a", "b"})}
    assert is_partial_refinement(refined, g, 1)


def test_apply_split_rejects_bad_subsets():
    g = gen_fig5()
    with pytest.raises(ValueError, match="invalid split"):
        apply_split(g, SplitStep(1, "I", ("r",), ("a",)))
    singleton = gen_fig5_split()
    with pytest.raises(ValueError, match="invalid split"):
        apply_split(singleton, SplitStep(1, "I1", ("r",), ()))


def test_enumerate_k0_returns_the_game_itself():
    g = gen_fig5()
    assert enumerate_k_refinements(g, 1, 0) == [g]


def test_enumerate_k1_fig5_contains_the_split_variant():
    g = gen_fig5()
    games = enumerate_k_refinements(g, 1, 1)
    target = {frozenset({"r"}), frozenset({"a", "b"})}
    partitions = [
        {frozenset(i.nodes) for i in cand.infosets[1].values()} for cand in games
    ]
    assert target in partitions
    # atoms of fig5 are {r}, {a}, {b}: one split gives the trivial
    # partition plus the three two-block groupings
    assert len(games) == 4


def test_enumeration_counts_match_partition_combinatorics():
    # an X3C game's big infoset has one atom per universe element, so the
    # number of at-most-k-split refinements is the number of partitions of
    # the atom set into at most k+1 blocks (dummy infosets are singletons)
    g, _ = gen_x3c_game(6, [(1, 2, 3), (4, 5, 6)])
    # Stirling numbers S(6, 1) + S(6, 2) = 1 + 31
    assert len(enumerate_k_refinements(g, 1, 1)) == 32
    # + S(6, 3) = 90
    assert len(enumerate_k_refinements(g, 1, 2)) == 122


def test_every_enumerated_refinement_is_partial():
    g = gen_fig2()
    for cand in enumerate_k_refinements(g, 1, 1):
        assert is_partial_refinement(cand, g, 1)
        assert validate_game(cand) == []


def test_k_best_partial_x3c_yes_instance():
    g, k = gen_x3c_game(6, [(1, 2, 3), (4, 5, 6)])
    assert k == 1
    best, value = k_best_partial(g, k)
    assert value == 1
    parts = {frozenset(i.nodes) for i in best.infosets[1].values()
             if len(i.nodes) > 1 or not next(iter(i.nodes)).startswith("o")}
    assert frozenset({"p1", "p2", "p3"}) in parts
    assert frozenset({"p4", "p5", "p6"}) in parts


def test_k_best_partial_x3c_no_instance():
    g, k = gen_x3c_game(6, [(1, 2, 3), (3, 4, 5)])
    _, value = k_best_partial(g, k)
    assert value < 1
    assert value == Fraction(5, 6)


def test_k_best_partial_k0_equals_optimal():
    g, _ = gen_x3c_game(6, [(1, 2, 3), (4, 5, 6)])
    refined, value = k_best_partial(g, 0)
    assert value == optimal_strategy(g).utilities[0] == Fraction(1, 2)
    assert refined is g


def test_k_best_partial_is_monotone_in_k():
    for seed in range(5):
        g = gen_random(depth=3, branching=2, merge_rate=0.8, chance_rate=0.3,
                       absentmindedness=False, seed=1100 + seed)
        values = [float(k_best_partial(g, k)[1]) for k in range(3)]
        assert values == sorted(values)


def test_enough_splits_recover_the_full_refinement_value():
    g = gen_fig2()
    pr, plan = perfect_recall_refinement(g, 1)
    splits_needed = sum(len(v) - 1 for v in plan.mapping.values())
    _, value = k_best_partial(g, splits_needed)
    assert value == optimal_strategy(pr).utilities[0]


def test_enumeration_cap():
    g, _ = gen_x3c_game(9, [(1, 2, 3), (4, 5, 6), (7, 8, 9)])
    with pytest.raises(CapExceededError):
        enumerate_k_refinements(g, 1, 8, cap=50)


def test_fig5_regression_report():
    report = edt_nash_partial_regression()
    assert report["merged_plays_first"]
    assert report["merged_class_utilities"] == [pytest.approx(2.0)]
    assert report["split_always_second_accepted"]
    assert report["split_always_second_utility"] == pytest.approx(1.0)
