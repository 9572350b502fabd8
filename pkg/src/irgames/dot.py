"""Graphviz export in the usual game-figure style: chance nodes as boxes,
decision nodes labelled by owner, terminals as plain utility tuples, and
infosets joined by dashed gray links.  Output is byte-deterministic."""

from __future__ import annotations

from typing import Optional

from .game import Game
from .strategies import StrategyProfile


def _quote(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def export_dot(game: Game, profile: Optional[StrategyProfile] = None) -> str:
    lines = ["digraph game {", "  rankdir=TB;", "  node [fontsize=10];"]
    order = game._ordered_ids()
    for nid in order:
        node = game.nodes[nid]
        if node.is_terminal:
            utils = ", ".join(f"{float(u):g}" for u in game.utilities.get(nid, ()))
            lines.append(f"  {_quote(nid)} [shape=plaintext, label={_quote(utils)}];")
        elif node.is_chance:
            lines.append(f"  {_quote(nid)} [shape=box, label={_quote('chance')}];")
        else:
            lines.append(
                f"  {_quote(nid)} [shape=ellipse, label={_quote(f'P{node.owner}')}];"
            )
    for nid in order:
        node = game.nodes[nid]
        for idx, (action, child) in enumerate(zip(node.actions, node.children)):
            label = action
            if node.is_chance:
                label = f"{action} ({float(node.chance_dist[idx]):g})"
            elif profile is not None:
                row = profile[node.owner].row(game.infoset_of_node[nid])
                label = f"{action} ({float(row[idx]):g})"
            lines.append(
                f"  {_quote(nid)} -> {_quote(child)} [label={_quote(label)}];"
            )
    for player in sorted(game.infosets):
        for iid in sorted(game.infosets[player]):
            members = sorted(game.infosets[player][iid].nodes)
            for a, b in zip(members, members[1:]):
                lines.append(
                    f"  {_quote(a)} -> {_quote(b)} "
                    "[style=dashed, dir=none, color=gray, constraint=false];"
                )
    lines.append("}")
    return "\n".join(lines) + "\n"
