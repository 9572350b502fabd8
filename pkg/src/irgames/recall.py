"""Recall refinements: the partial order on infoset partitions, the
coarsest perfect-recall refinement, and the dummy-node transform.

Two games are comparable only when they share the exact same tree (node
ids, ownership, actions, chance, utilities); refinements differ solely in
how one player's decision nodes are grouped into infosets.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

from .game import (
    Game,
    Infoset,
    ObservationSequence,
    obs_i,
)


@dataclass(frozen=True)
class RefinementPlan:
    """Witness that one game refines another for a given player.

    ``mapping`` sends each coarse infoset id to the fine infoset ids whose
    node sets disjointly partition it.
    """

    player: int
    mapping: dict[str, tuple[str, ...]]


class NotComparableError(ValueError):
    """The two games do not share the same game tree."""


def same_tree(a: Game, b: Game) -> bool:
    """Node-identifier-based tree equality: ids, owners, actions, children,
    chance distributions, and utilities all identical."""
    if a.players != b.players or a.root != b.root:
        return False
    if set(a.nodes) != set(b.nodes):
        return False
    for nid, node in a.nodes.items():
        other = b.nodes[nid]
        if (
            node.owner != other.owner
            or node.actions != other.actions
            or node.children != other.children
            or node.chance_dist != other.chance_dist
        ):
            return False
    return a.utilities == b.utilities


def refines(g_fine: Game, g_coarse: Game, player: int) -> Optional[RefinementPlan]:
    """Return the plan witnessing ``g_fine >= g_coarse`` for ``player``,
    or None when the relation does not hold.

    Raises NotComparableError when the trees differ.
    """
    if not same_tree(g_fine, g_coarse):
        raise NotComparableError("not comparable: games have different trees")
    g_fine._check_player(player)

    fine_by_node: dict[str, str] = {}
    for iset in g_fine.infosets.get(player, {}).values():
        for nid in iset.nodes:
            fine_by_node[nid] = iset.id

    mapping: dict[str, tuple[str, ...]] = {}
    for iset in g_coarse.infosets.get(player, {}).values():
        coarse_nodes = set(iset.nodes)
        fine_ids = sorted({fine_by_node[n] for n in iset.nodes})
        union: set[str] = set()
        for fid in fine_ids:
            members = set(g_fine.infosets[player][fid].nodes)
            if not members <= coarse_nodes:
                return None  # a fine infoset crosses the coarse boundary
            union |= members
        if union != coarse_nodes:
            return None
        mapping[iset.id] = tuple(fine_ids)
    return RefinementPlan(player=player, mapping=mapping)


def has_perfect_recall(game: Game, player: int) -> bool:
    """True iff all nodes of each infoset of ``player`` share obs_i."""
    game._check_player(player)
    for iset in game.infosets.get(player, {}).values():
        signatures = {_obs_key(obs_i(game, nid, player)) for nid in iset.nodes}
        if len(signatures) > 1:
            return False
    return True


def _obs_key(sequence: ObservationSequence) -> tuple:
    return tuple((s[1], s[2]) for s in sequence.steps)


def _class_id(base: str, key: tuple) -> str:
    digest = hashlib.sha1(repr(key).encode("utf-8")).hexdigest()[:8]
    return f"{base}.{digest}"


def perfect_recall_refinement(game: Game, player: int) -> tuple[Game, RefinementPlan]:
    """Split each infoset of ``player`` by observed-history equivalence.

    Nodes stay together exactly when their obs_i sequences agree; every
    other player's partition is untouched.  New infoset ids are derived
    from the old id and a content hash of the shared observation, so
    repeated runs are bit-identical.  Infosets that do not split keep
    their id.
    """
    game._check_player(player)
    new_isets: dict[str, Infoset] = {}
    mapping: dict[str, tuple[str, ...]] = {}
    for iset in game.infosets.get(player, {}).values():
        classes: dict[tuple, list[str]] = {}
        for nid in iset.nodes:
            classes.setdefault(_obs_key(obs_i(game, nid, player)), []).append(nid)
        if len(classes) == 1:
            new_isets[iset.id] = iset
            mapping[iset.id] = (iset.id,)
            continue
        ids = []
        for key in sorted(classes):
            cid = _class_id(iset.id, key)
            new_isets[cid] = Infoset(
                id=cid,
                player=player,
                nodes=tuple(classes[key]),
                actions=iset.actions,
            )
            ids.append(cid)
        mapping[iset.id] = tuple(ids)

    infosets = {p: dict(per) for p, per in game.infosets.items()}
    infosets[player] = new_isets
    refined = Game(
        players=game.players,
        root=game.root,
        nodes=game.nodes,
        utilities=game.utilities,
        infosets=infosets,
        name=f"pr_{player}({game.name})" if game.name else "",
    )
    return refined, RefinementPlan(player=player, mapping=mapping)


def perfect_recall_refinement_all(game: Game) -> Game:
    """Apply the perfect-recall split to every strategic player at once.

    Each player's split uses the original game's observations, mirroring
    the simultaneous all-player definition.
    """
    out = game
    for player in range(1, game.players + 1):
        refined, _ = perfect_recall_refinement(game, player)
        infosets = {p: dict(per) for p, per in out.infosets.items()}
        infosets[player] = dict(refined.infosets[player])
        out = Game(
            players=out.players,
            root=out.root,
            nodes=out.nodes,
            utilities=out.utilities,
            infosets=infosets,
            name=out.name,
        )
    return Game(
        players=out.players,
        root=out.root,
        nodes=out.nodes,
        utilities=out.utilities,
        infosets=out.infosets,
        name=f"pr({game.name})" if game.name else "",
    )


def check_coarsest(game: Game, player: int, candidate: Game) -> bool:
    """Oracle for the coarsest-refinement property.

    Preconditions (checked, reported as ValueError): ``candidate`` shares
    the tree, refines ``game`` for ``player``, and gives that player
    perfect recall.  Under those, the coarsest perfect-recall refinement
    must itself be refined by the candidate; returns that truth value.
    """
    if not same_tree(game, candidate):
        raise NotComparableError("not comparable: games have different trees")
    if refines(candidate, game, player) is None:
        raise ValueError("precondition failed: candidate does not refine game")
    if not has_perfect_recall(candidate, player):
        raise ValueError("precondition failed: candidate lacks perfect recall")
    pr_game, _ = perfect_recall_refinement(game, player)
    return refines(candidate, pr_game, player) is not None


def full_information_refinement(game: Game, player: int) -> Game:
    """Put every decision node of ``player`` in its own singleton infoset
    (perfect information for that player; the finest refinement)."""
    game._check_player(player)
    new_isets = {}
    for iset in game.infosets.get(player, {}).values():
        if len(iset.nodes) == 1:
            new_isets[iset.id] = iset
            continue
        for nid in iset.nodes:
            cid = f"{iset.id}#{nid}"
            new_isets[cid] = Infoset(
                id=cid, player=player, nodes=(nid,), actions=iset.actions
            )
    infosets = {p: dict(per) for p, per in game.infosets.items()}
    infosets[player] = new_isets
    return Game(
        players=game.players,
        root=game.root,
        nodes=game.nodes,
        utilities=game.utilities,
        infosets=infosets,
        name=f"perfect_info_{player}({game.name})" if game.name else "",
    )


def dummy_node_transform(game: Game, player: int) -> Game:
    """Insert a single-action node of ``player`` before each of its
    decision nodes, each in its own singleton infoset.

    The added observations make the player's perfect-recall refinement
    fully informative (all-singleton infosets) while preserving utilities
    and every other player's infosets.
    """
    game._check_player(player)
    targets = [nid for nid, n in game.nodes.items() if n.owner == player]
    if not targets:
        return game

    dummy_of = {nid: f"d:{nid}" for nid in targets}
    nodes = {}
    for nid, node in game.nodes.items():
        children = tuple(dummy_of.get(c, c) for c in node.children)
        nodes[nid] = type(node)(
            id=nid,
            owner=node.owner,
            actions=node.actions,
            children=children,
            chance_dist=node.chance_dist,
        )
    for nid, did in dummy_of.items():
        nodes[did] = type(game.nodes[nid])(
            id=did, owner=player, actions=("pass",), children=(nid,)
        )

    infosets = {p: dict(per) for p, per in game.infosets.items()}
    per = dict(infosets.get(player, {}))
    for nid, did in sorted(dummy_of.items()):
        iset_id = f"Id:{nid}"
        per[iset_id] = Infoset(
            id=iset_id, player=player, nodes=(did,), actions=("pass",)
        )
    infosets[player] = per

    root = dummy_of.get(game.root, game.root)
    return Game(
        players=game.players,
        root=root,
        nodes=nodes,
        utilities=game.utilities,
        infosets=infosets,
        name=f"dummy_{player}({game.name})" if game.name else "",
    )
