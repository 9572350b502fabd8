"""Behavioral strategies and everything evaluated from them: reach
probabilities, expected utilities, exact utility gradients, deviations,
strategy lifting across refinements, and realization equivalence.

Expected utilities of absentminded games are polynomials (not multilinear)
in the strategy entries, so gradients are computed by exact monomial
differentiation along root-to-leaf paths rather than by resampling or
finite differences; the latter stay available as test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .game import CHANCE, Game, Infoset, Node, Num, seq


@dataclass(frozen=True)
class BehavioralStrategy:
    """Per-infoset distributions over the infoset's ordered actions."""

    player: int
    table: Mapping[str, tuple[Num, ...]]

    def row(self, infoset_id: str) -> tuple[Num, ...]:
        try:
            return self.table[infoset_id]
        except KeyError:
            raise KeyError(
                f"strategy of player {self.player} has no row for infoset "
                f"{infoset_id!r}"
            ) from None

    def replace_row(self, infoset_id: str, probs: Sequence[Num]) -> "BehavioralStrategy":
        table = dict(self.table)
        table[infoset_id] = tuple(probs)
        return BehavioralStrategy(player=self.player, table=table)

    def as_player(self, player: int) -> "BehavioralStrategy":
        return BehavioralStrategy(player=player, table=dict(self.table))


@dataclass(frozen=True)
class StrategyProfile:
    """One behavioral strategy per strategic player, indexed 1..N."""

    strategies: tuple[BehavioralStrategy, ...]

    def __getitem__(self, player: int) -> BehavioralStrategy:
        for s in self.strategies:
            if s.player == player:
                return s
        raise KeyError(f"profile has no strategy for player {player}")

    def replace(self, strategy: BehavioralStrategy) -> "StrategyProfile":
        return StrategyProfile(
            strategies=tuple(
                strategy if s.player == strategy.player else s
                for s in self.strategies
            )
        )


def profile_from(*strategies: BehavioralStrategy) -> StrategyProfile:
    return StrategyProfile(strategies=tuple(strategies))


def uniform_strategy(game: Game, player: int, rational: Optional[bool] = None) -> BehavioralStrategy:
    """Uniform play at every infoset; Fractions in rational mode."""
    game._check_player(player)
    if rational is None:
        rational = game.is_rational
    table = {}
    for iset in game.infosets.get(player, {}).values():
        n = len(iset.actions)
        p = Fraction(1, n) if rational else 1.0 / n
        table[iset.id] = (p,) * n
    return BehavioralStrategy(player=player, table=table)


def pure_strategy(game: Game, player: int, choice: Mapping[str, int]) -> BehavioralStrategy:
    """Deterministic strategy given an action index per infoset."""
    table = {}
    for iset in game.infosets.get(player, {}).values():
        idx = choice[iset.id]
        row = [Fraction(0)] * len(iset.actions)
        row[idx] = Fraction(1)
        table[iset.id] = tuple(row)
    return BehavioralStrategy(player=player, table=table)


def uniform_profile(game: Game, rational: Optional[bool] = None) -> StrategyProfile:
    return StrategyProfile(
        strategies=tuple(
            uniform_strategy(game, p, rational) for p in range(1, game.players + 1)
        )
    )


def validate_profile(game: Game, profile: StrategyProfile, tol: float = 1e-9) -> list[str]:
    """Report missing rows and rows that are not distributions."""
    problems = []
    players_seen = sorted(s.player for s in profile.strategies)
    if players_seen != list(range(1, game.players + 1)):
        problems.append(f"profile covers players {players_seen}, game has {game.players}")
    for s in profile.strategies:
        for iset in game.infosets.get(s.player, {}).values():
            row = s.table.get(iset.id)
            if row is None:
                problems.append(f"player {s.player}: missing row for {iset.id!r}")
                continue
            if len(row) != len(iset.actions):
                problems.append(f"player {s.player}: row {iset.id!r} has wrong length")
                continue
            if any(p < 0 for p in row):
                problems.append(f"player {s.player}: negative probability at {iset.id!r}")
            total = sum(row)
            exact = all(isinstance(p, Fraction) for p in row)
            if (total != 1) if exact else (abs(float(total) - 1.0) > tol):
                problems.append(
                    f"player {s.player}: row {iset.id!r} sums to {float(total):.12g}"
                )
    return problems


# ---------------------------------------------------------------------------
# Reach probabilities and expected utility
# ---------------------------------------------------------------------------


def _step_probability(game: Game, profile: StrategyProfile, node: Node, child: str) -> Num:
    idx = node.children.index(child)
    if node.is_chance:
        return node.chance_dist[idx]
    iset_id = game.infoset_of_node[node.id]
    return profile[node.owner].row(iset_id)[idx]


def reach_probability(game: Game, profile: StrategyProfile, h_from: str, h_to: str) -> Num:
    """Product of strategy/chance probabilities along the path from
    ``h_from`` to ``h_to``; zero when ``h_from`` is not an ancestor."""
    game.node(h_from)
    game.node(h_to)
    if h_from == h_to:
        return Fraction(1) if game.is_rational else 1.0
    path = seq(game, h_to) + [h_to]
    if h_from not in path[:-1]:
        return Fraction(0) if game.is_rational else 0.0
    start = path.index(h_from)
    prob: Num = Fraction(1)
    for a, b in zip(path[start:-1], path[start + 1 :]):
        prob = prob * _step_probability(game, profile, game.nodes[a], b)
    return prob


def node_reach_map(game: Game, profile: StrategyProfile) -> dict[str, Num]:
    """Reach probability from the root for every node (one top-down pass)."""
    out: dict[str, Num] = {game.root: Fraction(1) if game.is_rational else 1.0}
    stack = [game.root]
    while stack:
        nid = stack.pop()
        node = game.nodes[nid]
        for idx, child in enumerate(node.children):
            if node.is_chance:
                p = node.chance_dist[idx]
            else:
                p = profile[node.owner].row(game.infoset_of_node[nid])[idx]
            out[child] = out[nid] * p
            stack.append(child)
    return out


def infoset_reach(game: Game, profile: StrategyProfile, infoset_id: str) -> Num:
    """Probability of entering the infoset for the first time: sums node
    reach over first-visit members only."""
    from .game import first_visit_nodes

    iset = game.infoset(infoset_id)
    reach = node_reach_map(game, profile)
    first = first_visit_nodes(game, infoset_id)
    return sum((reach[n] for n in sorted(first)), start=Fraction(0))


def infoset_frequency(game: Game, profile: StrategyProfile, infoset_id: str) -> Num:
    """Expected number of visits: sums node reach over all members, so the
    value may exceed 1 under absentmindedness."""
    iset = game.infoset(infoset_id)
    reach = node_reach_map(game, profile)
    return sum((reach[n] for n in iset.nodes), start=Fraction(0))


def expected_utility(
    game: Game, profile: StrategyProfile, player: int, node_id: Optional[str] = None
) -> Num:
    """Sum over terminals of reach (from ``node_id``, default root) times
    the player's utility."""
    game._check_player(player)
    start = game.root if node_id is None else node_id
    game.node(start)

    def walk(nid: str) -> Num:
        node = game.nodes[nid]
        if node.is_terminal:
            return game.utilities[nid][player - 1]
        total: Num = Fraction(0)
        for idx, child in enumerate(node.children):
            if node.is_chance:
                p = node.chance_dist[idx]
            else:
                p = profile[node.owner].row(game.infoset_of_node[nid])[idx]
            if p:
                total = total + p * walk(child)
        return total

    return walk(start)


# ---------------------------------------------------------------------------
# Exact gradients (monomial differentiation)
# ---------------------------------------------------------------------------


def _leaf_factorization(game: Game, profile: StrategyProfile, player: int, leaf: str):
    """Split a leaf's reach monomial into a constant (chance and opponents)
    and per-(infoset, action-index) exponents for ``player``."""
    const: Num = Fraction(1)
    powers: dict[tuple[str, int], int] = {}
    path = seq(game, leaf) + [leaf]
    for a, b in zip(path[:-1], path[1:]):
        node = game.nodes[a]
        idx = node.children.index(b)
        if node.is_chance:
            const = const * node.chance_dist[idx]
        elif node.owner != player:
            iset_id = game.infoset_of_node[a]
            const = const * profile[node.owner].row(iset_id)[idx]
        else:
            key = (game.infoset_of_node[a], idx)
            powers[key] = powers.get(key, 0) + 1
    return const, powers


def utility_gradient(
    game: Game,
    profile: StrategyProfile,
    player: int,
    infoset_id: str,
    action: Union[int, str],
) -> Num:
    """Exact partial derivative of the player's expected utility with
    respect to the probability of ``action`` at ``infoset_id``.

    Opponents and chance are folded into per-leaf constants; within each
    leaf monomial the targeted coordinate appears with its visit count as
    exponent, so d/dp p^m = m p^(m-1) applied leafwise.
    """
    iset = game.infoset(infoset_id, player)
    aidx = action if isinstance(action, int) else iset.actions.index(action)
    if not (0 <= aidx < len(iset.actions)):
        raise KeyError(f"unknown action {action!r} at infoset {infoset_id!r}")
    strategy = profile[player]

    total: Num = Fraction(0)
    for leaf in game.terminals:
        u = game.utilities[leaf][player - 1]
        if not u:
            continue
        const, powers = _leaf_factorization(game, profile, player, leaf)
        m = powers.get((infoset_id, aidx), 0)
        if m == 0 or not const:
            continue
        term: Num = const * m
        p = strategy.row(infoset_id)[aidx]
        for _ in range(m - 1):
            term = term * p
        skip = (infoset_id, aidx)
        for (iid, j), n in powers.items():
            if (iid, j) == skip:
                continue
            q = strategy.row(iid)[j]
            for _ in range(n):
                term = term * q
        total = total + u * term
    return total


def finite_difference_gradient(
    game: Game,
    profile: StrategyProfile,
    player: int,
    infoset_id: str,
    action_index: int,
    step: float = 1e-6,
) -> float:
    """Central finite-difference oracle for :func:`utility_gradient`.

    Perturbs the single coordinate without renormalizing the row (the
    analytic gradient is likewise coordinate-wise).
    """
    strategy = profile[player]
    row = [float(p) for p in strategy.row(infoset_id)]

    def value(delta: float) -> float:
        bumped = list(row)
        bumped[action_index] += delta
        prof = profile.replace(strategy.replace_row(infoset_id, bumped))
        return float(expected_utility(game, prof, player))

    return (value(step) - value(-step)) / (2 * step)


# ---------------------------------------------------------------------------
# Deviations, lifting, equivalence, opponent folding
# ---------------------------------------------------------------------------


def deviate(
    profile: StrategyProfile, infoset_id: str, sigma: Sequence[Num], player: Optional[int] = None
) -> StrategyProfile:
    """The profile that plays ``sigma`` at the given infoset and is
    unchanged elsewhere."""
    owners = [
        s for s in profile.strategies
        if infoset_id in s.table and (player is None or s.player == player)
    ]
    if not owners:
        raise KeyError(f"no strategy in the profile covers infoset {infoset_id!r}")
    strategy = owners[0]
    if len(sigma) != len(strategy.row(infoset_id)):
        raise ValueError(
            f"deviation at {infoset_id!r} has dimension {len(sigma)}, "
            f"row has {len(strategy.row(infoset_id))}"
        )
    return profile.replace(strategy.replace_row(infoset_id, tuple(sigma)))


def lift_strategy(
    g_coarse: Game,
    g_fine: Game,
    plan,
    profile_coarse: StrategyProfile,
) -> StrategyProfile:
    """Transport a profile along a refinement plan: every fine infoset
    plays exactly as its coarse parent did, preserving all reach
    probabilities and hence utilities."""
    player = plan.player
    coarse = profile_coarse[player]
    table: dict[str, tuple[Num, ...]] = {}
    for coarse_id, fine_ids in plan.mapping.items():
        row = coarse.row(coarse_id)
        for fid in fine_ids:
            fine_iset = g_fine.infosets[player][fid]
            if len(fine_iset.actions) != len(row):
                raise ValueError(f"plan mismatch at fine infoset {fid!r}")
            table[fid] = row
    for iset in g_fine.infosets.get(player, {}).values():
        if iset.id not in table:
            raise ValueError(f"plan does not cover fine infoset {iset.id!r}")
    return profile_coarse.replace(BehavioralStrategy(player=player, table=table))


def realization_equivalent(
    game: Game, profile_a: StrategyProfile, profile_b: StrategyProfile, tol: float = 1e-9
) -> bool:
    """True when both profiles induce the same reach probability at every
    node, up to ``tol``."""
    ra = node_reach_map(game, profile_a)
    rb = node_reach_map(game, profile_b)
    return all(abs(float(ra[n] - rb[n])) <= tol for n in game.nodes)


def fix_opponents(game: Game, profile: StrategyProfile, player: int) -> Game:
    """The single-player view: every other strategic player's node becomes
    a chance node playing that player's strategy row; ``player`` keeps its
    infosets (re-labelled as player 1) and its utility column."""
    game._check_player(player)
    nodes = {}
    for nid, node in game.nodes.items():
        if node.owner == player:
            nodes[nid] = Node(
                id=nid, owner=1, actions=node.actions, children=node.children
            )
        elif isinstance(node.owner, int):
            row = profile[node.owner].row(game.infoset_of_node[nid])
            nodes[nid] = Node(
                id=nid,
                owner=CHANCE,
                actions=node.actions,
                children=node.children,
                chance_dist=tuple(row),
            )
        else:
            nodes[nid] = node

    utilities = {z: (us[player - 1],) for z, us in game.utilities.items()}
    infosets = {
        1: {
            iset.id: Infoset(
                id=iset.id, player=1, nodes=iset.nodes, actions=iset.actions
            )
            for iset in game.infosets.get(player, {}).values()
        }
    }
    return Game(
        players=1,
        root=game.root,
        nodes=nodes,
        utilities=utilities,
        infosets=infosets,
        name=f"fixed_{player}({game.name})" if game.name else "",
    )
