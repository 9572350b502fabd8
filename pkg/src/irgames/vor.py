"""Value of recall: the ratio of Player 1's utility under a solution
concept in the coarsest perfect-recall refinement to that in the original
game, together with the structural quantities that bound it.

Three utility-independent coefficients drive every bound:

* the absentmindedness coefficient of a leaf: the product of
  empirical-frequency powers over its repeat-visited infosets, which is
  exactly the reach probability the leaf's best stationary strategy
  achieves in a chance-free game;
* the chance coefficient of a leaf: the product of chance probabilities on
  its path;
* the branching factor of a chance node: a recursive count bounding how
  many leaves a pure strategy can reach with positive probability below it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .game import Game, Num, chance_nodes, has_absentmindedness, obs, seq, subtree_nodes
from .numeric import NumericGame, project_rows
from .recall import perfect_recall_refinement
from .solvers import (
    SolveReport,
    SolverConfig,
    _cfg,
    _pure_seed_vectors,
    _random_mixed,
    best_worst,
    optimal_strategy,
)
from .strategies import (
    BehavioralStrategy,
    StrategyProfile,
    expected_utility,
    node_reach_map,
    profile_from,
    uniform_strategy,
)

VOR_CONCEPTS = (
    "OPT",
    "bEDT", "wEDT", "bCDT", "wCDT", "bNASH", "wNASH",
    "bEDT-NASH", "wEDT-NASH", "bCDT-NASH", "wCDT-NASH",
)


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------


def _player1_visit_counts(game: Game, leaf: str) -> dict[str, dict[int, int]]:
    """Per infoset of Player 1 on the leaf's path: action-index -> count."""
    counts: dict[str, dict[int, int]] = {}
    path = seq(game, leaf) + [leaf]
    for a, b in zip(path[:-1], path[1:]):
        node = game.nodes[a]
        if node.owner != 1:
            continue
        iid = game.infoset_of_node[a]
        idx = node.children.index(b)
        counts.setdefault(iid, {})[idx] = counts.get(iid, {}).get(idx, 0) + 1
    return counts


def am_coefficient(game: Game, leaf: str) -> Num:
    """Product over repeat-visited infosets of (n_a / n_I) ** n_a, one
    factor per action taken there; 1 when no infoset repeats."""
    if not game.nodes[leaf].is_terminal:
        raise ValueError(f"{leaf!r} is not a terminal node")
    out: Num = Fraction(1)
    for iid, per_action in _player1_visit_counts(game, leaf).items():
        n_total = sum(per_action.values())
        if n_total <= 1:
            continue
        for n_a in per_action.values():
            out = out * Fraction(n_a, n_total) ** n_a
    return out


def am_witness(game: Game, leaf: str) -> BehavioralStrategy:
    """The stationary strategy that reaches the leaf with probability
    exactly equal to its absentmindedness coefficient (chance-free games):
    play each path action with its empirical frequency, uniform off-path."""
    if chance_nodes(game):
        raise ValueError("am_witness requires a game without chance nodes")
    if not game.nodes[leaf].is_terminal:
        raise ValueError(f"{leaf!r} is not a terminal node")
    strategy = uniform_strategy(game, 1, rational=True)
    for iid, per_action in _player1_visit_counts(game, leaf).items():
        n_total = sum(per_action.values())
        size = len(game.infosets[1][iid].actions)
        row = [Fraction(per_action.get(a, 0), n_total) for a in range(size)]
        strategy = strategy.replace_row(iid, tuple(row))
    return strategy


def chance_coefficient(game: Game, leaf: str) -> Num:
    """Product of chance probabilities along the leaf's path; 1 if none."""
    if not game.nodes[leaf].is_terminal:
        raise ValueError(f"{leaf!r} is not a terminal node")
    out: Num = Fraction(1)
    path = seq(game, leaf) + [leaf]
    for a, b in zip(path[:-1], path[1:]):
        node = game.nodes[a]
        if node.is_chance:
            out = out * node.chance_dist[node.children.index(b)]
    return out


def branching_factor(game: Game, node_id: str) -> int:
    """Recursive chance branching: sum over actions of 1 when the action's
    subtree is chance-free, else the max branching factor inside it."""
    node = game.nodes[node_id]
    if not node.is_chance:
        raise ValueError(f"{node_id!r} is not a chance node")
    total = 0
    for child in node.children:
        below = [
            n for n in subtree_nodes(game, child) if game.nodes[n].is_chance
        ]
        if not below:
            total += 1
        else:
            total += max(branching_factor(game, h) for h in below)
    return total


@dataclass(frozen=True)
class CoefficientTable:
    """Per-leaf absentmindedness and chance coefficients plus per-chance-
    node branching factors; all independent of the utility function."""

    am: dict[str, Num]
    chance: dict[str, Num]
    branching: dict[str, int]


def coefficient_table(game: Game) -> CoefficientTable:
    return CoefficientTable(
        am={z: am_coefficient(game, z) for z in game.terminals},
        chance={z: chance_coefficient(game, z) for z in game.terminals},
        branching={h: branching_factor(game, h) for h in chance_nodes(game)},
    )


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------


def _argmax_leaf(game: Game, score) -> str:
    """Deterministic argmax over terminals: ties go to the smallest id."""
    best = None
    for z in sorted(game.terminals):
        s = score(z)
        if best is None or s > best[0]:
            best = (s, z)
    return best[1]


def bound_am(game: Game) -> tuple[Num, Num]:
    """The two chance-free bounds: max utility over best stationary value,
    and the inverse absentmindedness coefficient of the top leaf."""
    if chance_nodes(game):
        raise ValueError("bound_am requires a game without chance nodes")
    ams = {z: am_coefficient(game, z) for z in game.terminals}
    u = {z: game.utilities[z][0] for z in game.terminals}
    top = max(u.values())
    best_stationary = max(ams[z] * u[z] for z in game.terminals)
    if best_stationary == 0:
        raise ValueError("all utilities are zero; the bound is undefined")
    bound1 = top / best_stationary
    zstar = _argmax_leaf(game, lambda z: u[z])
    bound2 = 1 / ams[zstar]
    return bound1, bound2


def bound_am_entropy(game: Game, leaf: str) -> Num:
    """Support-size bound dominating 1/am(z): product over repeat-visited
    infosets of min(visits, actions) ** visits."""
    if not game.nodes[leaf].is_terminal:
        raise ValueError(f"{leaf!r} is not a terminal node")
    out: Num = Fraction(1)
    for iid, per_action in _player1_visit_counts(game, leaf).items():
        n_total = sum(per_action.values())
        if n_total <= 1:
            continue
        size = len(game.infosets[1][iid].actions)
        out = out * Fraction(min(n_total, size)) ** n_total
    return out


def bound_chance(game: Game, cfg: Optional[SolverConfig] = None) -> tuple[Num, Num]:
    """The two absentmindedness-free bounds: refined optimum over the best
    single-leaf chance value, and the max branching factor."""
    if has_absentmindedness(game, 1):
        raise ValueError("bound_chance requires a game without absentmindedness")
    cfg = _cfg(cfg)
    refined, _ = perfect_recall_refinement(game, 1)
    opt_refined = optimal_strategy(refined, cfg).utilities[0]
    best_leaf_value = max(
        chance_coefficient(game, z) * game.utilities[z][0] for z in game.terminals
    )
    if best_leaf_value == 0:
        raise ValueError("all utilities are zero; the bound is undefined")
    bound1 = opt_refined / best_leaf_value
    hs = chance_nodes(game)
    bound2 = max((branching_factor(game, h) for h in hs), default=1)
    return bound1, Fraction(bound2)


def bound_composed(game: Game) -> Num:
    """Utility-independent bound for any game on this tree and infosets:
    the largest branching factor over the smallest absentmindedness
    coefficient (each factor 1 when its domain is empty)."""
    if game.players != 1:
        raise ValueError("bound_composed expects a single-player game")
    hs = chance_nodes(game)
    beta = max((branching_factor(game, h) for h in hs), default=1)
    min_am = min(am_coefficient(game, z) for z in game.terminals)
    return Fraction(beta) / min_am


# ---------------------------------------------------------------------------
# Pure-strategy identities used by the bound proofs
# ---------------------------------------------------------------------------


def _require_pure(profile: StrategyProfile) -> None:
    for s in profile.strategies:
        for row in s.table.values():
            if any(0 < float(p) < 1 for p in row):
                raise ValueError("expected a pure strategy profile")


def pure_chance_identity(game: Game, profile: StrategyProfile) -> tuple[list[str], float]:
    """Leaves a pure profile reaches with positive probability; their
    chance coefficients sum to one and weight the utility exactly.
    Returns the leaves and |sum chi - 1|."""
    _require_pure(profile)
    reach = node_reach_map(game, profile)
    leaves = [z for z in game.terminals if float(reach[z]) > 0]
    chi_sum = sum((chance_coefficient(game, z) for z in leaves), start=Fraction(0))
    checksum = abs(float(chi_sum) - 1.0)
    value = sum(
        (chance_coefficient(game, z) * game.utilities[z][0] for z in leaves),
        start=Fraction(0),
    )
    gap = abs(float(value) - float(expected_utility(game, profile, 1)))
    if checksum > 1e-9 or gap > 1e-9:
        raise ValueError(
            f"pure-strategy chance identity violated (checksum {checksum:.3g}, "
            f"utility gap {gap:.3g})"
        )
    return leaves, checksum


def beta_leaf_bound(game: Game, profile: StrategyProfile, node_id: str) -> bool:
    """Whether the positively-reached leaves below a reached chance node
    number at most its branching factor (always true; used as an oracle)."""
    _require_pure(profile)
    node = game.nodes[node_id]
    if not node.is_chance:
        raise ValueError(f"{node_id!r} is not a chance node")
    reach = node_reach_map(game, profile)
    if float(reach[node_id]) <= 0:
        raise ValueError(f"chance node {node_id!r} is not reached under the profile")
    below = set(subtree_nodes(game, node_id))
    count = sum(
        1
        for z in game.terminals
        if z in below and float(reach[z]) > 0
    )
    return count <= branching_factor(game, node_id)


# ---------------------------------------------------------------------------
# VoR computation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VorReport:
    concept: str
    numerator: Num          # Player 1 utility under the concept in pr_1
    denominator: Num        # same in the original game
    ratio: Optional[float]  # None when undefined (0/0)
    ratio_kind: str         # "finite" | "infinite" | "undefined"
    refined_report: SolveReport
    base_report: SolveReport
    bounds: dict[str, Optional[float]]
    bounds_satisfied: dict[str, Optional[bool]]


def _solve_concept(game: Game, concept: str, cfg: SolverConfig) -> SolveReport:
    if concept == "OPT":
        return optimal_strategy(game, cfg)
    which = "best" if concept[0] == "b" else "worst"
    return best_worst(game, concept[1:], which, cfg)


def vor_compute(game: Game, concept: str, cfg: Optional[SolverConfig] = None) -> VorReport:
    """Solve the concept in the game and in its Player-1 perfect-recall
    refinement; report the utility ratio next to every applicable bound."""
    cfg = _cfg(cfg)
    if concept not in VOR_CONCEPTS:
        raise ValueError(f"unknown VoR concept {concept!r}; choose from {VOR_CONCEPTS}")
    refined, _ = perfect_recall_refinement(game, 1)
    base_report = _solve_concept(game, concept, cfg)
    refined_report = _solve_concept(refined, concept, cfg)
    numerator = refined_report.utilities[0]
    denominator = base_report.utilities[0]

    if float(denominator) > 0:
        ratio: Optional[float] = float(numerator) / float(denominator)
        kind = "finite"
    elif float(numerator) > 0:
        ratio, kind = None, "infinite"
    else:
        ratio, kind = None, "undefined"

    bounds: dict[str, Optional[float]] = {
        "am_utility": None,
        "am_zstar": None,
        "am_entropy": None,
        "chance_utility": None,
        "chance_beta": None,
        "composed": None,
    }
    if game.players == 1:
        if not chance_nodes(game):
            try:
                b1, b2 = bound_am(game)
                bounds["am_utility"] = float(b1)
                bounds["am_zstar"] = float(b2)
            except ValueError:
                pass  # degenerate utilities; leave the entries empty
            zstar = _argmax_leaf(game, lambda z: game.utilities[z][0])
            bounds["am_entropy"] = float(bound_am_entropy(game, zstar))
        if not has_absentmindedness(game, 1):
            try:
                c1, c2 = bound_chance(game, cfg)
                bounds["chance_utility"] = float(c1)
                bounds["chance_beta"] = float(c2)
            except ValueError:
                pass
        bounds["composed"] = float(bound_composed(game))

    satisfied = {
        name: (None if b is None or ratio is None else ratio <= b + 1e-9)
        for name, b in bounds.items()
    }
    return VorReport(
        concept=concept,
        numerator=numerator,
        denominator=denominator,
        ratio=ratio,
        ratio_kind=kind,
        refined_report=refined_report,
        base_report=base_report,
        bounds=bounds,
        bounds_satisfied=satisfied,
    )


# ---------------------------------------------------------------------------
# Smoothness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothnessVerdict:
    kind: str  # "falsified" | "pure-verified" | "sampled-ok"
    counterexample: Optional[StrategyProfile]
    worst_margin: float
    opt_utility: float


def smoothness_check(
    game: Game,
    pistar: Union[BehavioralStrategy, StrategyProfile],
    lam: float,
    mu: float,
    cfg: Optional[SolverConfig] = None,
) -> SmoothnessVerdict:
    """Test the per-infoset substitution inequality: the average utility of
    swapping one infoset's row to the candidate strategy must cover
    lam * OPT - mu * U(pi) for every profile pi.

    Pure profiles are checked exhaustively under the cap, plus sampled
    mixed profiles; a passing verdict is a certificate only for the pure
    set ("pure-verified" vs "sampled-ok"), falsification is always one.
    """
    cfg = _cfg(cfg)
    if game.players != 1:
        raise ValueError("smoothness_check expects a single-player game")
    if lam <= 0 or mu < 0:
        raise ValueError("require lam > 0 and mu >= 0")
    if isinstance(pistar, StrategyProfile):
        pistar = pistar[1]

    num = NumericGame(game)
    rng = cfg.rng()
    xstar = num.index.vector(profile_from(pistar))
    opt = float(optimal_strategy(game, cfg).utilities[0])
    rows = num.index.rows
    if not rows:
        return SmoothnessVerdict("pure-verified", None, 0.0, opt)

    pure, pure_full = _pure_seed_vectors(num.index, cfg, rng)
    samples = _random_mixed(num.index, rng, cfg.smoothness_samples)
    X = np.array(pure + samples)

    lhs = np.zeros(len(X))
    for row in rows:
        block = slice(row.offset, row.offset + row.size)
        Y = X.copy()
        Y[:, block] = xstar[block]
        lhs += num.utility(Y, 1)
    lhs /= len(rows)
    rhs = lam * opt - mu * num.utility(X, 1)
    margin = lhs - rhs
    worst = int(np.argmin(margin))
    if margin[worst] < -1e-9:
        return SmoothnessVerdict(
            "falsified", num.index.profile(X[worst]), float(margin[worst]), opt
        )
    kind = "pure-verified" if pure_full else "sampled-ok"
    return SmoothnessVerdict(kind, None, float(margin[worst]), opt)


def smooth_bounds(lam: float, mu: float, opt_utility: float,
                  composed_bound: float) -> tuple[float, float]:
    """Robust efficiency ratio lam/(1+mu) for single-infoset-deviation
    equilibria, and the induced recall bound (1+mu)/lam times the composed
    structural bound.  Every such equilibrium earns at least
    ratio * opt_utility."""
    if lam <= 0:
        raise ValueError("require lam > 0")
    rho = lam / (1.0 + mu)
    return rho, (1.0 + mu) / lam * float(composed_bound)
