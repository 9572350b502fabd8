"""Self-describing JSON files for games, strategies, and solve reports.

One format serves the whole toolkit so that golden tests can diff entire
files.  Rational numbers round-trip exactly: integers stay JSON integers,
non-integer fractions are written as "a/b" strings, floats stay floats.
Writing is canonical (fixed key order, nodes in depth-first order), so the
same game always produces identical bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Optional, Union

from .game import CHANCE, TERMINAL, Game, Infoset, Node, Num, make_game
from .solvers import SolveReport
from .strategies import BehavioralStrategy, StrategyProfile


class GameParseError(ValueError):
    """Input file is not a well-formed game/strategy document."""


def format_number(value: Num) -> Union[int, float, str]:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value)
        return f"{value.numerator}/{value.denominator}"
    return float(value)


def parse_number(raw, where: str = "") -> Num:
    if isinstance(raw, bool):
        raise GameParseError(f"expected a number{where}, got a boolean")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise GameParseError(f"bad rational literal {raw!r}{where}: {exc}") from None
    raise GameParseError(f"expected a number{where}, got {type(raw).__name__}")


def _owner_to_str(owner) -> str:
    if isinstance(owner, int):
        return f"P{owner}"
    return owner


def _owner_from_str(raw: str, where: str):
    if raw == CHANCE or raw == TERMINAL:
        return raw
    if isinstance(raw, str) and raw.startswith("P") and raw[1:].isdigit():
        return int(raw[1:])
    raise GameParseError(f"bad owner {raw!r}{where}")


def game_to_jsonable(game: Game) -> dict:
    nodes = []
    order = game._ordered_ids()
    order += [nid for nid in sorted(game.nodes) if nid not in set(order)]
    for nid in order:
        node = game.nodes[nid]
        entry: dict = {"id": node.id, "owner": _owner_to_str(node.owner)}
        if node.actions:
            entry["actions"] = list(node.actions)
            entry["children"] = list(node.children)
        if node.chance_dist is not None:
            entry["chance_probs"] = [format_number(p) for p in node.chance_dist]
        if node.is_terminal:
            utils = game.utilities.get(nid, ())
            entry["utils"] = [format_number(u) for u in utils]
        nodes.append(entry)
    infosets = []
    for player in sorted(game.infosets):
        for iid in sorted(game.infosets[player]):
            iset = game.infosets[player][iid]
            infosets.append(
                {
                    "player": player,
                    "id": iset.id,
                    "nodes": list(iset.nodes),
                    "actions": list(iset.actions),
                }
            )
    out = {
        "players": game.players,
        "root": game.root,
        "nodes": nodes,
        "infosets": infosets,
    }
    if game.name:
        out["name"] = game.name
    return out


def game_from_jsonable(doc) -> Game:
    if not isinstance(doc, dict):
        raise GameParseError("top-level game document must be an object")
    for key in ("players", "root", "nodes", "infosets"):
        if key not in doc:
            raise GameParseError(f"game document is missing the {key!r} field")
    nodes = []
    utilities = {}
    for entry in doc["nodes"]:
        nid = entry.get("id")
        if not isinstance(nid, str):
            raise GameParseError("every node needs a string 'id'")
        where = f" at node {nid!r}"
        owner = _owner_from_str(entry.get("owner"), where)
        actions = tuple(entry.get("actions", ()))
        children = tuple(entry.get("children", ()))
        dist = entry.get("chance_probs")
        chance_dist = (
            tuple(parse_number(p, where) for p in dist) if dist is not None else None
        )
        nodes.append(
            Node(id=nid, owner=owner, actions=actions, children=children,
                 chance_dist=chance_dist)
        )
        if "utils" in entry:
            utilities[nid] = tuple(parse_number(u, where) for u in entry["utils"])
    infosets = []
    for entry in doc["infosets"]:
        try:
            infosets.append(
                Infoset(
                    id=entry["id"],
                    player=int(entry["player"]),
                    nodes=tuple(entry["nodes"]),
                    actions=tuple(entry["actions"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise GameParseError(f"bad infoset entry {entry!r}: {exc}") from None
    return make_game(
        players=int(doc["players"]),
        root=doc["root"],
        nodes=nodes,
        utilities=utilities,
        infosets=infosets,
        name=doc.get("name", ""),
    )


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameParseError(
            f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None


def write_game(game: Game, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(game_to_jsonable(game)))


def read_game(path: str) -> Game:
    with open(path, "r", encoding="utf-8") as fh:
        return game_from_jsonable(loads(fh.read()))


# -- strategies --------------------------------------------------------------


def strategy_to_jsonable(strategy: BehavioralStrategy) -> dict:
    return {
        "player": strategy.player,
        "entries": [
            {"infoset": iid, "probs": [format_number(p) for p in row]}
            for iid, row in sorted(strategy.table.items())
        ],
    }


def strategy_from_jsonable(doc) -> BehavioralStrategy:
    try:
        table = {
            e["infoset"]: tuple(parse_number(p) for p in e["probs"])
            for e in doc["entries"]
        }
        return BehavioralStrategy(player=int(doc["player"]), table=table)
    except (KeyError, TypeError) as exc:
        raise GameParseError(f"bad strategy document: {exc}") from None


def profile_to_jsonable(profile: StrategyProfile) -> list:
    return [strategy_to_jsonable(s) for s in profile.strategies]


def profile_from_jsonable(doc) -> StrategyProfile:
    if isinstance(doc, dict):
        doc = [doc]
    if not isinstance(doc, list):
        raise GameParseError("a profile document must be a list of strategies")
    return StrategyProfile(
        strategies=tuple(strategy_from_jsonable(d) for d in doc)
    )


def write_profile(profile: StrategyProfile, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(profile_to_jsonable(profile)))


def read_profile(path: str) -> StrategyProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return profile_from_jsonable(loads(fh.read()))


# -- solve reports -----------------------------------------------------------


def report_to_jsonable(report: SolveReport) -> dict:
    return {
        "concept": report.concept,
        "which": report.which,
        "utilities": [format_number(u) for u in report.utilities],
        "residual": float(report.residual),
        "certified": report.certified,
        "notes": list(report.notes),
        "profile": profile_to_jsonable(report.profile),
    }
