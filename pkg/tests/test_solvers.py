"""Solution concepts: optimal strategies, equilibrium checks, rationality
refinements, best-response verification, and enumeration."""

from fractions import Fraction

import pytest

from conftest import single, strat

from irgames.game import has_absentmindedness
from irgames.generators import (
    gen_dory,
    gen_fig1,
    gen_fig2,
    gen_fig3,
    gen_fig5,
    gen_fig5_split,
    gen_lenny,
    gen_random,
)
from irgames.recall import perfect_recall_refinement
from irgames.strategies import (
    expected_utility,
    fix_opponents,
    profile_from,
    uniform_profile,
)
from irgames.solvers import (
    EquilibriumNotFoundError,
    SolverConfig,
    best_worst,
    cdt_nash_check,
    cdt_rational_check,
    cdt_utility,
    edt_check,
    edt_incentive,
    edt_nash_check,
    edt_rational_check,
    enumerate_equilibria,
    kkt_check,
    kkt_check_profile,
    nash_check,
    optimal_strategy,
)

EPS3 = Fraction(1, 10)
CFG = SolverConfig()


def fig3_pr_ids(pr):
    ids = sorted(pr.infosets[1])
    i21 = next(i for i in ids if pr.infosets[1][i].nodes == ("a",))
    i22 = next(i for i in ids if pr.infosets[1][i].nodes == ("b",))
    return i21, i22


# -- optimal strategies ------------------------------------------------------


def test_optimal_fig2_exact_value_and_mixing():
    report = optimal_strategy(gen_fig2())
    assert report.utilities[0] == Fraction(2, 3)
    assert report.profile[1].row("I")[0] == Fraction(1, 3)


def test_optimal_rejects_multiplayer():
    with pytest.raises(ValueError):
        optimal_strategy(gen_fig1(Fraction(1, 100)))


@pytest.mark.parametrize("n", [2, 4, 6])
def test_optimal_lenny(n):
    report = optimal_strategy(gen_lenny(n))
    assert report.utilities[0] == Fraction(1, 2 ** n)
    pr, _ = perfect_recall_refinement(gen_lenny(n), 1)
    assert optimal_strategy(pr).utilities[0] == 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_optimal_dory(n):
    g = gen_dory(n)
    report = optimal_strategy(g)
    assert report.certified == "exact"
    assert report.utilities[0] == Fraction(1, n)
    pr, _ = perfect_recall_refinement(g, 1)
    assert optimal_strategy(pr).utilities[0] == 1


def test_pure_enumeration_agrees_with_dp_on_perfect_recall_games():
    from irgames.solvers import _perfect_recall_dp, _pure_enumeration_opt

    for seed in range(10):
        g = gen_random(depth=4, branching=2, merge_rate=0.0, chance_rate=0.3,
                       absentmindedness=False, seed=seed)
        v_dp, _ = _perfect_recall_dp(g)
        v_enum, _ = _pure_enumeration_opt(g)
        assert v_dp == v_enum


# -- incentives and equilibrium checks --------------------------------------


def test_edt_incentive_at_optimum_is_nonpositive():
    g = gen_fig2()
    prof = single({"I": (Fraction(1, 3), Fraction(2, 3))})
    assert edt_incentive(g, prof, 1, "I") <= 1e-12


def test_edt_incentives_fig3_always_left():
    g = gen_fig3(EPS3)
    prof = single({"I1": (1, 0), "I2": (1, 0)})
    assert edt_incentive(g, prof, 1, "I1") <= 0
    assert edt_incentive(g, prof, 1, "I2") <= 0
    ok, residual = edt_check(g, prof)
    assert ok and residual == 0


def test_edt_check_rejects_always_right_in_fig3():
    g = gen_fig3(EPS3)
    prof = single({"I1": (0, 1), "I2": (0, 1)})
    ok, residual = edt_check(g, prof)
    assert not ok
    # deviating at I2 to L gains eps
    assert residual == pytest.approx(float(EPS3))
    # and from (R, L) the deviation at I1 to L gains 1 - eps
    rl = single({"I1": (0, 1), "I2": (1, 0)})
    assert edt_incentive(g, rl, 1, "I1") == pytest.approx(float(1 - EPS3))


def test_second_equilibrium_of_fig3_refinement():
    pr, _ = perfect_recall_refinement(gen_fig3(EPS3), 1)
    i21, i22 = fig3_pr_ids(pr)
    rrl = single({"I1": (0, 1), i21: (0, 1), i22: (1, 0)})
    ok, residual = edt_check(pr, rrl)
    assert ok and residual <= 1e-12
    assert expected_utility(pr, rrl, 1) == EPS3


def test_cdt_utility_reduces_to_exact_value_without_absentmindedness():
    g = gen_fig3(EPS3)
    prof = single({"I1": (Fraction(1, 2), Fraction(1, 2)),
                   "I2": (Fraction(1, 4), Fraction(3, 4))})
    from irgames.strategies import deviate

    sigma = (Fraction(2, 3), Fraction(1, 3))
    assert cdt_utility(g, prof, 1, "I2", sigma) == \
        expected_utility(g, deviate(prof, "I2", sigma), 1)
    # zero deviation returns the base utility
    row = prof[1].row("I2")
    assert cdt_utility(g, prof, 1, "I2", row) == expected_utility(g, prof, 1)


def test_kkt_check_fig2():
    g = gen_fig2()
    interior = single({"I": (Fraction(1, 3), Fraction(2, 3))})
    ok, residual = kkt_check(g, interior, 1)
    assert ok and residual <= 1e-12
    vertex = single({"I": (1, 0)})
    ok, residual = kkt_check(g, vertex, 1)
    assert not ok and residual > 1


def test_kkt_check_fig1_cooperative_profile():
    g = gen_fig1(Fraction(1, 100))
    ct = profile_from(strat(1, {"I1": (1, 0)}), strat(2, {"I2": (1, 0)}))
    ok, residual = kkt_check_profile(g, ct)
    assert ok and residual <= 1e-12


# -- rationality refinements -------------------------------------------------


def test_edt_rational_fig5_examples():
    g5 = gen_fig5()
    always_left = strat(1, {"I": (1, 0)})
    assert edt_rational_check(g5, always_left)
    g5b = gen_fig5_split()
    rr = strat(1, {"I1": (0, 1), "I2": (0, 1)})
    assert edt_rational_check(g5b, rr)


def test_edt_rational_rejects_unreachable_bluff():
    pr, _ = perfect_recall_refinement(gen_fig3(EPS3), 1)
    i21, i22 = fig3_pr_ids(pr)
    rrl = strat(1, {"I1": (0, 1), i21: (0, 1), i22: (1, 0)})
    assert not edt_rational_check(pr, rrl)
    lll = strat(1, {"I1": (1, 0), i21: (1, 0), i22: (1, 0)})
    assert edt_rational_check(pr, lll)


def test_cdt_rational_agrees_with_edt_rational_without_absentmindedness():
    for seed in range(8):
        g = gen_random(depth=3, branching=2, merge_rate=0.5, chance_rate=0.3,
                       absentmindedness=False, seed=200 + seed)
        report = optimal_strategy(g)
        s = report.profile[1]
        assert edt_rational_check(g, s) == cdt_rational_check(g, s)


def test_cdt_rational_rejects_fig3_bluff():
    pr, _ = perfect_recall_refinement(gen_fig3(EPS3), 1)
    i21, i22 = fig3_pr_ids(pr)
    rrl = strat(1, {"I1": (0, 1), i21: (0, 1), i22: (1, 0)})
    assert not cdt_rational_check(pr, rrl)


def test_edt_nash_examples():
    pr, _ = perfect_recall_refinement(gen_fig3(EPS3), 1)
    i21, i22 = fig3_pr_ids(pr)
    rrl = single({"I1": (0, 1), i21: (0, 1), i22: (1, 0)})
    assert not edt_nash_check(pr, rrl)
    lll = single({"I1": (1, 0), i21: (1, 0), i22: (1, 0)})
    assert edt_nash_check(pr, lll)
    # the completion search accepts representatives with bad unreached rows
    llr = single({"I1": (1, 0), i21: (1, 0), i22: (0, 1)})
    assert edt_nash_check(pr, llr)


def test_edt_nash_on_perfect_recall_game_means_optimal():
    for seed in range(6):
        g = gen_random(depth=3, branching=2, merge_rate=0.0, chance_rate=0.3,
                       absentmindedness=False, seed=300 + seed)
        opt = optimal_strategy(g)
        assert edt_nash_check(g, opt.profile)


def test_cdt_nash_fig1():
    g = gen_fig1(Fraction(1, 100))
    ct = profile_from(strat(1, {"I1": (1, 0)}), strat(2, {"I2": (1, 0)}))
    assert cdt_nash_check(g, ct)


def test_nash_check_fig1_examples():
    g = gen_fig1(Fraction(1, 100))
    ct = profile_from(strat(1, {"I1": (1, 0)}), strat(2, {"I2": (1, 0)}))
    ok, residual, _ = nash_check(g, ct)
    assert ok and residual <= 1e-9
    pr, _ = perfect_recall_refinement(g, 1)
    first = next(i for i in pr.infosets[1] if pr.infosets[1][i].nodes == ("v1",))
    second = next(i for i in pr.infosets[1] if pr.infosets[1][i].nodes == ("v2",))
    cdw = profile_from(
        strat(1, {first: (1, 0), second: (0, 1)}),
        strat(2, {"I2": (0, 1)}),
    )
    ok, residual, _ = nash_check(pr, cdw)
    assert ok and residual <= 1e-9


def test_single_player_optimal_is_nash():
    g = gen_fig2()
    report = optimal_strategy(g)
    ok, _, _ = nash_check(g, report.profile)
    assert ok


# -- enumeration and selection ----------------------------------------------


def test_enumerate_fig1_cdt_single_class():
    g = gen_fig1(Fraction(1, 100))
    classes = enumerate_equilibria(g, "CDT")
    assert len(classes) == 1
    assert classes[0].utilities == (Fraction(2), Fraction(1))


def test_enumerate_fig3_edt_classes():
    g = gen_fig3(EPS3)
    assert [c.utilities[0] for c in enumerate_equilibria(g, "EDT")] == [Fraction(1)]
    pr, _ = perfect_recall_refinement(g, 1)
    utilities = [float(c.utilities[0]) for c in enumerate_equilibria(pr, "EDT")]
    assert utilities == [pytest.approx(0.1), pytest.approx(1.0)]


def test_best_worst_selectors():
    pr, _ = perfect_recall_refinement(gen_fig3(EPS3), 1)
    worst = best_worst(pr, "EDT", "worst")
    best = best_worst(pr, "EDT", "best")
    assert float(worst.utilities[0]) == pytest.approx(0.1)
    assert float(best.utilities[0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        best_worst(pr, "EDT", "median")


def test_best_edt_equals_optimal_for_single_player():
    for g in (gen_fig2(), gen_lenny(4), gen_fig5()):
        opt = optimal_strategy(g)
        best = best_worst(g, "EDT", "best")
        assert abs(float(best.utilities[0]) - float(opt.utilities[0])) < 1e-9


def test_hierarchy_on_random_games():
    # Nash passes imply EDT passes imply KKT passes at one tolerance;
    # EDT and KKT agree on games without absentmindedness.
    import numpy as np

    rng_profiles = 0
    for seed in range(12):
        absent = bool(seed % 2)
        g = gen_random(depth=3, branching=2, merge_rate=0.6, chance_rate=0.2,
                       absentmindedness=absent, seed=400 + seed, players=1)
        profiles = [uniform_profile(g, rational=False)]
        if g.infosets.get(1):
            profiles.append(optimal_strategy(g).profile)
        for prof in profiles:
            edt_ok, _ = edt_check(g, prof)
            kkt_ok, _ = kkt_check_profile(g, prof)
            nash_ok, _, _ = nash_check(g, prof)
            if nash_ok:
                assert edt_ok
            if edt_ok:
                assert kkt_ok
            if not absent and not has_absentmindedness(g, 1):
                rng_profiles += 1
                assert edt_ok == kkt_ok
    assert rng_profiles > 0


def test_enumeration_cap_errors():
    from irgames.solvers import CapExceededError

    g = gen_random(depth=4, branching=2, merge_rate=0.0, chance_rate=0.0,
                   absentmindedness=False, seed=1)
    small_cap = SolverConfig(enum_dim_cap=2)
    with pytest.raises(CapExceededError):
        enumerate_equilibria(g, "EDT", small_cap)
