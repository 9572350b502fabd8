"""Command-line interface tying the toolkit together.

Every command is a pure function of its input files, flags, and seed; all
numeric output is printed with 12 significant digits, plus the exact
rational in parentheses when one is available.

Exit codes: 0 success, 1 domain errors (no equilibrium, caps, invalid
game), 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import fileio
from .dot import export_dot
from .game import Game, validate_game
from .generators import (
    default_valid_utility,
    gen_dory,
    gen_fig1,
    gen_fig2,
    gen_fig3,
    gen_fig5,
    gen_fig5_split,
    gen_lenny,
    gen_random,
    gen_sat_game,
    gen_x3c_game,
)
from .partial import k_best_partial, enumerate_k_refinements
from .recall import perfect_recall_refinement, perfect_recall_refinement_all
from .solvers import (
    CapExceededError,
    EquilibriumNotFoundError,
    SolverConfig,
    best_worst,
    optimal_strategy,
)
from .vor import (
    bound_am,
    bound_am_entropy,
    bound_chance,
    bound_composed,
    coefficient_table,
    smoothness_check,
    vor_compute,
    _argmax_leaf,
)
from .game import chance_nodes, has_absentmindedness


class DomainError(RuntimeError):
    pass


def fmt(value) -> str:
    """12 significant digits, with the exact rational when available."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{float(value):.12g} (= {value})"
    return f"{float(value):.12g}"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_game(path: str) -> Game:
    return fileio.read_game(path)


def _config_from(args) -> SolverConfig:
    return SolverConfig(
        grid_resolution=args.grid_resolution,
        multistart=args.multistart,
        eps_eq=args.eps_eq,
        seed=args.seed,
    )


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    defaults = SolverConfig()
    p.add_argument("--grid-resolution", type=int, default=defaults.grid_resolution,
                   help="mixed-seed grid resolution (delta = 1/this)")
    p.add_argument("--multistart", type=int, default=defaults.multistart,
                   help="random restarts for local search")
    p.add_argument("--eps-eq", type=float, default=defaults.eps_eq,
                   help="equilibrium residual tolerance")
    p.add_argument("--seed", type=int,
                   default=int(os.environ.get("IRGAMES_SEED", defaults.seed)),
                   help="solver RNG seed (env IRGAMES_SEED overrides the default)")


def _print_report(report) -> None:
    print(f"concept: {report.concept} ({report.which})")
    for i, u in enumerate(report.utilities, start=1):
        print(f"u{i}: {fmt(u)}")
    print(f"residual: {fmt(report.residual)}")
    print(f"certified: {report.certified}")
    for note in report.notes:
        print(f"note: {note}")
    for s in report.profile.strategies:
        for iid, row in sorted(s.table.items()):
            probs = ", ".join(fmt(p) for p in row)
            print(f"P{s.player} {iid}: [{probs}]")


def cmd_validate(args) -> int:
    game = _load_game(args.game)
    problems = validate_game(game)
    for p in problems:
        print(p)
    if problems:
        return 1
    print("ok")
    return 0


def cmd_refine(args) -> int:
    game = _load_game(args.game)
    if args.all:
        refined = perfect_recall_refinement_all(game)
    else:
        refined, _ = perfect_recall_refinement(game, args.player)
    _emit(fileio.dumps(fileio.game_to_jsonable(refined)), args.out)
    return 0


_SOLVE_CONCEPTS = ("opt", "edt", "cdt", "nash", "edt-nash", "cdt-nash")


def cmd_solve(args) -> int:
    game = _load_game(args.game)
    cfg = _config_from(args)
    which = "best" if args.best else "worst" if args.worst else "best"
    try:
        if args.concept == "opt":
            report = optimal_strategy(game, cfg)
        else:
            report = best_worst(game, args.concept.upper(), which, cfg)
    except (EquilibriumNotFoundError, CapExceededError, ValueError) as exc:
        raise DomainError(str(exc)) from exc
    _print_report(report)
    return 0


def cmd_vor(args) -> int:
    game = _load_game(args.game)
    cfg = _config_from(args)
    concept = args.concept
    canon = {c.lower(): c for c in (
        "OPT", "bEDT", "wEDT", "bCDT", "wCDT", "bNASH", "wNASH",
        "bEDT-NASH", "wEDT-NASH", "bCDT-NASH", "wCDT-NASH",
    )}
    if concept.lower() not in canon:
        raise DomainError(f"unknown VoR concept {concept!r}")
    try:
        report = vor_compute(game, canon[concept.lower()], cfg)
    except (EquilibriumNotFoundError, CapExceededError, ValueError) as exc:
        raise DomainError(str(exc)) from exc
    print(f"concept: {report.concept}")
    print(f"u1 refined: {fmt(report.numerator)}")
    print(f"u1 original: {fmt(report.denominator)}")
    if report.ratio_kind == "finite":
        num, den = report.numerator, report.denominator
        if isinstance(num, Fraction) and isinstance(den, Fraction):
            print(f"vor: {fmt(num / den)}")
        else:
            print(f"vor: {fmt(report.ratio)}")
    else:
        print(f"vor: {report.ratio_kind}")
    for name, value in report.bounds.items():
        if value is not None:
            flag = report.bounds_satisfied[name]
            print(f"bound {name}: {fmt(value)} "
                  f"({'satisfied' if flag else 'VIOLATED' if flag is False else 'n/a'})")
    return 0


def cmd_coeffs(args) -> int:
    game = _load_game(args.game)
    table = coefficient_table(game)
    for z in sorted(table.am):
        print(f"am {z}: {fmt(table.am[z])}")
    for z in sorted(table.chance):
        print(f"chance {z}: {fmt(table.chance[z])}")
    for h in sorted(table.branching):
        print(f"branching {h}: {table.branching[h]}")
    return 0


def cmd_bounds(args) -> int:
    game = _load_game(args.game)
    cfg = _config_from(args)
    if game.players != 1:
        raise DomainError("bounds apply to single-player games")
    if not chance_nodes(game):
        b1, b2 = bound_am(game)
        print(f"am utility bound: {fmt(b1)}")
        print(f"am zstar bound: {fmt(b2)}")
        zstar = _argmax_leaf(game, lambda z: game.utilities[z][0])
        print(f"am entropy bound: {fmt(bound_am_entropy(game, zstar))}")
    if not has_absentmindedness(game, 1):
        c1, c2 = bound_chance(game, cfg)
        print(f"chance utility bound: {fmt(c1)}")
        print(f"chance beta bound: {fmt(c2)}")
    print(f"composed bound: {fmt(bound_composed(game))}")
    return 0


def cmd_smooth_check(args) -> int:
    game = _load_game(args.game)
    cfg = _config_from(args)
    pistar = fileio.read_profile(args.pistar)
    try:
        verdict = smoothness_check(game, pistar, args.lam, args.mu, cfg)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    print(f"verdict: {verdict.kind}")
    print(f"worst margin: {fmt(verdict.worst_margin)}")
    print(f"opt: {fmt(verdict.opt_utility)}")
    if verdict.counterexample is not None:
        for s in verdict.counterexample.strategies:
            for iid, row in sorted(s.table.items()):
                print(f"counterexample P{s.player} {iid}: "
                      f"[{', '.join(fmt(p) for p in row)}]")
        return 1
    return 0


def cmd_partial_best(args) -> int:
    game = _load_game(args.game)
    cfg = _config_from(args)
    try:
        candidates = enumerate_k_refinements(game, 1, args.k)
        best_game, value = k_best_partial(game, args.k, cfg)
    except (CapExceededError, ValueError) as exc:
        raise DomainError(str(exc)) from exc
    shown = 0
    for cand in candidates:
        score = optimal_strategy(cand, cfg).utilities[0]
        isets = len(cand.infosets.get(1, {}))
        print(f"candidate infosets={isets}: {fmt(score)}")
        shown += 1
        if shown >= args.table_cap:
            print(f"... ({len(candidates) - shown} more)")
            break
    print(f"best: {fmt(value)}")
    if args.out:
        fileio.write_game(best_game, args.out)
    return 0


def cmd_gen(args) -> int:
    name = args.name
    if name == "fig1":
        game = gen_fig1(Fraction(args.eps))
    elif name == "fig2":
        game = gen_fig2()
    elif name == "fig3":
        game = gen_fig3(Fraction(args.eps))
    elif name == "fig5":
        game = gen_fig5_split() if args.split else gen_fig5()
    elif name == "lenny":
        game = gen_lenny(args.n)
    elif name == "dory":
        game = gen_dory(args.n)
    elif name == "sat":
        clauses = _parse_int_groups(args.clauses)
        game = gen_sat_game(clauses, Fraction(args.eta), args.M)
    elif name == "x3c":
        family = _parse_int_groups(args.family)
        game, k = gen_x3c_game(args.universe, family)
        print(f"k: {k}", file=sys.stderr)
    elif name == "valid-utility":
        game = default_valid_utility()
    elif name == "random":
        game = gen_random(
            depth=args.depth, branching=args.branching,
            merge_rate=args.merge_rate, chance_rate=args.chance_rate,
            absentmindedness=args.absentminded, seed=args.seed,
            players=args.players,
        )
    else:  # unreachable; argparse restricts choices
        raise DomainError(f"unknown generator {name!r}")
    _emit(fileio.dumps(fileio.game_to_jsonable(game)), args.out)
    return 0


def _parse_int_groups(text: str) -> list[tuple[int, ...]]:
    try:
        return [
            tuple(int(tok) for tok in group.split(",") if tok.strip())
            for group in text.split(";")
            if group.strip()
        ]
    except ValueError as exc:
        raise DomainError(f"bad group list {text!r}: {exc}") from exc


def cmd_export_dot(args) -> int:
    game = _load_game(args.game)
    profile = fileio.read_profile(args.strategy) if args.strategy else None
    _emit(export_dot(game, profile), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irgames",
        description="Imperfect-recall games: refinements, equilibria, value of recall.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt_cls = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("validate", help="check game invariants",
                       formatter_class=fmt_cls)
    p.add_argument("game")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("refine", help="perfect-recall refinement",
                       formatter_class=fmt_cls)
    p.add_argument("game")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--player", type=int, default=1)
    group.add_argument("--all", action="store_true",
                       help="refine every player at once")
    p.add_argument("--out")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("solve", help="solve for a solution concept",
                       formatter_class=fmt_cls)
    p.add_argument("game")
    p.add_argument("--concept", choices=_SOLVE_CONCEPTS, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--best", action="store_true")
    group.add_argument("--worst", action="store_true")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("vor", help="value of recall for a concept",
                       formatter_class=fmt_cls)
    p.add_argument("game")
    p.add_argument("--concept", required=True,
                   help="opt, bedt, wedt, bcdt, wcdt, bnash, wnash, "
                        "bedt-nash, wedt-nash, bcdt-nash, wcdt-nash")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_vor)

    p = sub.add_parser("coeffs", help="per-leaf and per-chance-node coefficients",
                       formatter_class=fmt_cls)
    p.add_argument("game")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("bounds", help="structural bounds on the value of recall",
                       formatter_class=fmt_cls)
    p.add_argument("game")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("smooth-check", help="test the smoothness inequality",
                       formatter_class=fmt_cls)
    p.add_argument("game")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--pistar", required=True,
                   help="strategy file with the substitution strategy")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_smooth_check)

    p = sub.add_parser("partial-best", help="best k-split partial refinement",
                       formatter_class=fmt_cls)
    p.add_argument("game")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", help="write the winning game here")
    p.add_argument("--table-cap", type=int, default=50,
                   help="max candidate scores to print")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_partial_best)

    p = sub.add_parser("gen", help="write a generated game",
                       formatter_class=fmt_cls)
    p.add_argument("name", choices=(
        "fig1", "fig2", "fig3", "fig5", "lenny", "dory", "sat", "x3c",
        "valid-utility", "random",
    ))
    p.add_argument("--eps", default="1/100", help="fig1/fig3 epsilon")
    p.add_argument("--split", action="store_true", help="fig5: split variant")
    p.add_argument("--n", type=int, default=4, help="lenny/dory size")
    p.add_argument("--clauses", default="1,2,3;-1,2,3",
                   help="sat: semicolon-separated literal triples")
    p.add_argument("--eta", default="1", help="sat: base utility")
    p.add_argument("--M", type=int, default=1, help="sat: separation factor")
    p.add_argument("--universe", type=int, default=6, help="x3c: universe size")
    p.add_argument("--family", default="1,2,3;4,5,6",
                   help="x3c: semicolon-separated element triples")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--branching", type=int, default=2)
    p.add_argument("--merge-rate", type=float, default=0.5)
    p.add_argument("--chance-rate", type=float, default=0.2)
    p.add_argument("--players", type=int, default=1)
    p.add_argument("--absentminded", action="store_true")
    p.add_argument("--seed", type=int,
                   default=int(os.environ.get("IRGAMES_SEED", 0)))
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("export-dot", help="Graphviz rendering of a game",
                       formatter_class=fmt_cls)
    p.add_argument("game")
    p.add_argument("--strategy", help="profile file for edge annotations")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_dot)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except fileio.GameParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DomainError, EquilibriumNotFoundError, CapExceededError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
