"""Solution concepts for imperfect-recall games.

Covers optimal strategies in single-player games, single-infoset-deviation
(EDT) and stationarity (CDT/KKT) equilibrium checks, the limit-based
rationality refinements and the Nash-style equilibrium refinements built on
them, best-response verification against exact solves, and small-game
equilibrium enumeration with best/worst selection.

Computation policy, in one place:

* games without absentmindedness admit pure optima, so optimal play is
  found by exhaustive pure enumeration (exact, vectorized), or by infoset
  DP when the player has perfect recall;
* with absentmindedness the utility is a polynomial over a product of
  simplices, so optimal play falls back to a seeded grid scan plus
  multistart projected gradient ascent, then snaps near-rational optima to
  exact fractions when that does not lose value;
* equilibrium enumeration seeds pure/grid/random profiles, polishes them by
  improving-deviation dynamics (gradient dynamics for CDT), keeps profiles
  whose residual clears the tolerance, and dedups by realization
  equivalence.  Flags on every report say how much certainty was earned.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .game import Game, Num, has_absentmindedness, seq
from .numeric import FlatIndex, NumericGame, Row, project_rows, simplex_grid
from .recall import has_perfect_recall
from .strategies import (
    BehavioralStrategy,
    StrategyProfile,
    deviate,
    expected_utility,
    fix_opponents,
    infoset_frequency,
    infoset_reach,
    node_reach_map,
    profile_from,
    pure_strategy,
    uniform_strategy,
    utility_gradient,
    _leaf_factorization,
)

CONCEPTS = ("OPT", "EDT", "CDT", "NASH", "EDT-NASH", "CDT-NASH")


class CapExceededError(ValueError):
    """Instance too large for the exhaustive path; shrink it or raise caps."""


class EquilibriumNotFoundError(RuntimeError):
    """No profile passed the concept's residual test at this resolution."""


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by all solvers; defaults match the documented tests."""

    grid_resolution: int = 64
    multistart: int = 32
    ascent_iters: int = 10_000
    polish_iters: int = 200
    eps_eq: float = 1e-6
    schedule: tuple = tuple(2.0 ** -k for k in range(1, 21))
    schedule_safety: float = 2.0
    supp_tol: float = 1e-9
    dedup_tol: float = 1e-6
    pure_cap: int = 200_000
    enum_pure_cap: int = 4096
    enum_pure_samples: int = 200
    grid_cap: int = 5_000
    grid_samples: int = 256
    enum_dim_cap: int = 512
    witness_cap: int = 256
    snap_denominator: int = 4096
    smoothness_samples: int = 10_000
    seed: int = 0

    @property
    def grid_delta(self) -> float:
        return 1.0 / self.grid_resolution

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a solve: profile, utilities, residual, and an honest
    certification flag (exact / grid-certified(...) / heuristic)."""

    concept: str
    which: str
    profile: StrategyProfile
    utilities: tuple
    residual: float
    certified: str
    notes: tuple[str, ...] = ()

    @property
    def u1(self) -> Num:
        return self.utilities[0]


def _cfg(cfg: Optional[SolverConfig]) -> SolverConfig:
    return cfg if cfg is not None else DEFAULT_CONFIG


def _profile_utilities(game: Game, profile: StrategyProfile) -> tuple:
    return tuple(
        expected_utility(game, profile, p) for p in range(1, game.players + 1)
    )


# ---------------------------------------------------------------------------
# Optimal strategies (single-player)
# ---------------------------------------------------------------------------


def optimal_strategy(game: Game, cfg: Optional[SolverConfig] = None) -> SolveReport:
    """Best achievable play in a single-player game.

    Without absentmindedness a pure optimum exists, so the answer is exact:
    by infoset DP under perfect recall, otherwise by vectorized pure
    enumeration.  With absentmindedness the polynomial utility is attacked
    by a seeded grid scan plus multistart projected ascent; near-rational
    optima are snapped to exact fractions when doing so loses nothing.
    """
    cfg = _cfg(cfg)
    if game.players != 1:
        raise ValueError("optimal_strategy expects a single-player game; "
                         "use fix_opponents first")
    if not has_absentmindedness(game, 1):
        if has_perfect_recall(game, 1):
            value, strategy = _perfect_recall_dp(game)
            return SolveReport(
                concept="OPT", which="any",
                profile=profile_from(strategy),
                utilities=(value,), residual=0.0, certified="exact",
            )
        sizes = [len(i.actions) for i in game.infosets.get(1, {}).values()]
        if math.prod(sizes) <= cfg.pure_cap:
            value, strategy = _pure_enumeration_opt(game)
            return SolveReport(
                concept="OPT", which="any",
                profile=profile_from(strategy),
                utilities=(value,), residual=0.0, certified="exact",
            )
        report = _numeric_opt(game, cfg, grid=False)
        return replace(
            report,
            certified="heuristic",
            notes=report.notes + ("pure enumeration cap exceeded",),
        )
    return _numeric_opt(game, cfg, grid=True)


def _chance_weights(game: Game) -> dict[str, Num]:
    """Chance-only reach contribution of every node (players contribute 1)."""
    one: Num = Fraction(1) if game.is_rational else 1.0
    out = {game.root: one}
    stack = [game.root]
    while stack:
        nid = stack.pop()
        node = game.nodes[nid]
        for idx, child in enumerate(node.children):
            w = out[nid]
            if node.is_chance:
                w = w * node.chance_dist[idx]
            out[child] = w
            stack.append(child)
    return out


def _infoset_topo_order(game: Game) -> Optional[list[str]]:
    """Infoset ids ordered ancestors-first, or None on a cycle."""
    isets = game.infosets.get(1, {})
    member_of = {}
    for iset in isets.values():
        for nid in iset.nodes:
            member_of[nid] = iset.id
    edges: dict[str, set[str]] = {i: set() for i in isets}
    for nid, iid in member_of.items():
        for anc in seq(game, nid):
            aid = member_of.get(anc)
            if aid is not None and aid != iid:
                edges[aid].add(iid)
    indeg = {i: 0 for i in isets}
    for outs in edges.values():
        for j in outs:
            indeg[j] += 1
    ready = sorted(i for i, d in indeg.items() if d == 0)
    order = []
    while ready:
        cur = ready.pop(0)
        order.append(cur)
        for j in sorted(edges[cur]):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
        ready.sort()
    return order if len(order) == len(isets) else None


def _perfect_recall_dp(game: Game) -> tuple[Num, BehavioralStrategy]:
    """Exact optimal value by per-infoset backward induction.

    Sound for perfect recall: members of an infoset share the player's own
    action history, so their relative weights are chance-only and the
    infoset's contribution separates from upstream decisions.
    """
    order = _infoset_topo_order(game)
    if order is None:
        return _pure_enumeration_opt(game)
    weights = _chance_weights(game)
    isets = game.infosets.get(1, {})
    choice: dict[str, int] = {}
    memo: dict[str, Num] = {}

    def value(nid: str) -> Num:
        if nid in memo:
            return memo[nid]
        node = game.nodes[nid]
        if node.is_terminal:
            v: Num = game.utilities[nid][0]
        elif node.is_chance:
            v = sum(
                (p * value(c) for p, c in zip(node.chance_dist, node.children) if p),
                start=Fraction(0),
            )
        else:
            iid = game.infoset_of_node[nid]
            v = value(node.children[choice[iid]])
        memo[nid] = v
        return v

    for iid in reversed(order):
        iset = isets[iid]
        best_idx, best_val = 0, None
        for a in range(len(iset.actions)):
            total = sum(
                (
                    weights[nid] * value(game.nodes[nid].children[a])
                    for nid in iset.nodes
                ),
                start=Fraction(0),
            )
            if best_val is None or total > best_val:
                best_idx, best_val = a, total
        choice[iid] = best_idx

    strategy = pure_strategy(game, 1, choice)
    return value(game.root), strategy


def _pure_enumeration_opt(game: Game) -> tuple[Num, BehavioralStrategy]:
    """Exhaustive exact maximum over pure strategies (vectorized scan,
    then exact re-evaluation of the near-optimal slab)."""
    num = NumericGame(game)
    rows = num.index.rows
    sizes = [r.size for r in rows]
    total = math.prod(sizes) if sizes else 1

    if total == 1:
        choice = {r.infoset_id: 0 for r in rows}
        strategy = pure_strategy(game, 1, choice)
        return expected_utility(game, profile_from(strategy), 1), strategy

    assign = np.array(list(itertools.product(*[range(s) for s in sizes])),
                      dtype=np.intp)
    values = _pure_values(num, assign, player=1)
    best = values.max()
    slab = np.nonzero(values >= best - 1e-9 - 1e-9 * abs(best))[0]

    best_val: Optional[Num] = None
    best_choice = None
    for idx in slab:
        choice = {r.infoset_id: int(assign[idx, j]) for j, r in enumerate(rows)}
        strategy = pure_strategy(game, 1, choice)
        v = expected_utility(game, profile_from(strategy), 1)
        key = tuple(int(a) for a in assign[idx])
        if best_val is None or v > best_val or (v == best_val and key < best_choice[1]):
            best_val = v
            best_choice = (strategy, key)
    return best_val, best_choice[0]


def _pure_values(num: NumericGame, assign: np.ndarray, player: int) -> np.ndarray:
    """(T,) utilities of pure assignments (T, n_rows) for ``player``."""
    T = assign.shape[0]
    reached = np.ones((T, num.n_leaves), dtype=bool)
    coord_row = np.empty(num.index.dim, dtype=np.intp)
    coord_act = np.empty(num.index.dim, dtype=np.intp)
    for j, r in enumerate(num.index.rows):
        coord_row[r.offset : r.offset + r.size] = j
        coord_act[r.offset : r.offset + r.size] = np.arange(r.size)
    for e in range(num.n_entries):
        coord = int(num.ent_coord[e])
        reached[:, num.ent_leaf[e]] &= (
            assign[:, coord_row[coord]] == coord_act[coord]
        )
    u = num.coef * num.utils[:, player - 1]
    return reached @ u


def _numeric_opt(game: Game, cfg: SolverConfig, grid: bool) -> SolveReport:
    """Grid scan + multistart ascent for absentminded games."""
    num = NumericGame(game)
    rng = cfg.rng()
    seeds = [num.index.uniform()]
    seeds.extend(_random_vertices(num.index, rng, min(cfg.multistart, 16)))
    seeds.extend(_random_mixed(num.index, rng, cfg.multistart))

    grid_full = False
    if grid:
        grid_pts, grid_full = _grid_points(num.index, cfg, rng)
        seeds.extend(grid_pts)

    X = np.array(seeds)
    X = _ascent(num, X, player=1, cfg=cfg)
    vals = num.utility(X, 1)
    order = np.argsort(-vals)

    # Candidate pool: best ascent results plus their rational snaps.
    best_float = float(vals[order[0]])
    best_vec = X[order[0]]
    best_exact: Optional[tuple[Num, StrategyProfile]] = None
    if game.is_rational:
        for idx in order[: min(8, len(order))]:
            snapped = _snap_vector(num.index, X[idx], cfg.snap_denominator)
            if snapped is None:
                continue
            prof = snapped
            v = expected_utility(game, prof, 1)
            if best_exact is None or v > best_exact[0]:
                best_exact = (v, prof)

    if best_exact is not None and float(best_exact[0]) >= best_float - 1e-11:
        value, profile = best_exact
        residual = float(num.kkt_residuals(num.index.vector(profile)[None])[0])
    else:
        value = best_float
        profile = num.index.profile(best_vec)
        residual = float(num.kkt_residuals(best_vec[None])[0])

    certified = f"grid-certified(delta=1/{cfg.grid_resolution})" if grid_full else "heuristic"
    notes = ()
    if grid_full:
        lip = _lipschitz_bound(num)
        notes = (f"grid gap bound {lip * cfg.grid_delta:.6g}",)
    return SolveReport(
        concept="OPT", which="any", profile=profile,
        utilities=(value,), residual=residual, certified=certified, notes=notes,
    )


def _lipschitz_bound(num: NumericGame) -> float:
    """Sum over leaves of utility times own-path length: a sound bound on
    the utility change per unit sup-norm strategy change."""
    steps_per_leaf = np.zeros(num.n_leaves)
    for e in range(num.n_entries):
        steps_per_leaf[num.ent_leaf[e]] += num.ent_count[e]
    return float((num.coef * num.utils[:, 0] * steps_per_leaf).sum())


def _random_vertices(index: FlatIndex, rng, count: int) -> list[np.ndarray]:
    out = []
    for _ in range(count):
        x = np.zeros(index.dim)
        for row in index.rows:
            x[row.offset + int(rng.integers(row.size))] = 1.0
        out.append(x)
    return out


def _random_mixed(index: FlatIndex, rng, count: int) -> list[np.ndarray]:
    out = []
    for _ in range(count):
        x = np.empty(index.dim)
        for row in index.rows:
            x[row.offset : row.offset + row.size] = rng.dirichlet(np.ones(row.size))
        out.append(x)
    return out


def _grid_points(index: FlatIndex, cfg: SolverConfig, rng) -> tuple[list[np.ndarray], bool]:
    """Full product simplex grid when affordable, else a seeded sample."""
    m = cfg.grid_resolution
    counts = [
        math.comb(m + row.size - 1, row.size - 1) for row in index.rows
    ]
    total = math.prod(counts) if counts else 1
    if total <= cfg.grid_cap:
        per_row = [simplex_grid(row.size, m) for row in index.rows]
        pts = []
        for combo in itertools.product(*[range(len(g)) for g in per_row]):
            x = np.empty(index.dim)
            for row, g, i in zip(index.rows, per_row, combo):
                x[row.offset : row.offset + row.size] = g[i]
            pts.append(x)
        return pts, True
    pts = []
    for _ in range(cfg.grid_samples):
        x = np.empty(index.dim)
        for row in index.rows:
            comp = rng.multinomial(m, np.full(row.size, 1.0 / row.size))
            x[row.offset : row.offset + row.size] = comp / m
        pts.append(x)
    return pts, False


def _snap_vector(index: FlatIndex, x: np.ndarray, max_den: int) -> Optional[StrategyProfile]:
    """Round each row to nearby small fractions summing exactly to one."""
    tables: dict[int, dict[str, tuple]] = {p: {} for p in range(1, index.game.players + 1)}
    for row in index.rows:
        block = x[row.offset : row.offset + row.size]
        snapped = [Fraction(float(v)).limit_denominator(max_den) for v in block]
        snapped[-1] = 1 - sum(snapped[:-1])
        if any(p < 0 or p > 1 for p in snapped):
            return None
        if any(abs(float(p) - float(v)) > 1e-4 for p, v in zip(snapped, block)):
            return None
        tables[row.player][row.infoset_id] = tuple(snapped)
    return StrategyProfile(
        strategies=tuple(
            BehavioralStrategy(player=p, table=tables[p])
            for p in range(1, index.game.players + 1)
        )
    )


def _ascent(num: NumericGame, X: np.ndarray, player: int, cfg: SolverConfig,
            iters: Optional[int] = None) -> np.ndarray:
    """Batched projected gradient ascent with multiplicative step control.

    Seeds drop out of the batch once their step has collapsed, so the hard
    iteration cap only matters for pathological landscapes.
    """
    X = project_rows(num.index, X)
    B = X.shape[0]
    step = np.full(B, 0.25)
    active = np.ones(B, dtype=bool)
    max_iters = iters if iters is not None else cfg.ascent_iters
    for _ in range(max_iters):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        A = X[idx]
        f = num.utility(A, player)
        G = num.gradient(A, player)
        Y = project_rows(num.index, A + step[idx, None] * G)
        fY = num.utility(Y, player)
        improved = fY > f + 1e-14
        X[idx[improved]] = Y[improved]
        step[idx[improved]] *= 1.3
        step[idx[~improved]] *= 0.5
        active[idx[step[idx] < 1e-12]] = False
    return X


# ---------------------------------------------------------------------------
# EDT incentives and checks
# ---------------------------------------------------------------------------


def _absentminded_at(game: Game, infoset_id: str, player: int) -> bool:
    iset = game.infoset(infoset_id, player)
    members = set(iset.nodes)
    return any(anc in members for nid in iset.nodes for anc in seq(game, nid))


def _deviation_polynomial(game: Game, profile: StrategyProfile, player: int,
                          infoset_id: str) -> np.ndarray:
    """Coefficients (ascending) of s -> U(profile with the infoset's row
    replaced by (s, 1-s)), for two-action infosets."""
    max_deg = 0
    terms = []
    const = 0.0
    for leaf in game.terminals:
        u = float(game.utilities[leaf][player - 1])
        if u == 0.0:
            continue
        cc, powers = _leaf_factorization(game, profile, player, leaf)
        c = u * float(cc)
        p = powers.pop((infoset_id, 0), 0)
        q = powers.pop((infoset_id, 1), 0)
        for (iid, j), n in powers.items():
            c *= float(profile[player].row(iid)[j]) ** n
        if p + q == 0:
            const += c
        else:
            terms.append((c, p, q))
            max_deg = max(max_deg, p + q)
    poly = np.zeros(max_deg + 1)
    poly[0] = const
    for c, p, q in terms:
        part = np.array([1.0])  # ascending coeffs of (1 - s)^q
        for _ in range(q):
            part = np.convolve(part, [1.0, -1.0])
        padded = np.zeros(max_deg + 1)
        padded[p : p + len(part)] += c * part
        poly += padded
    return poly


def _maximize_poly_01(poly: np.ndarray) -> tuple[float, float]:
    """(max value, argmax) of an ascending-coefficient polynomial on [0,1]."""
    deriv = np.polynomial.polynomial.polyder(poly)
    candidates = [0.0, 1.0]
    if len(deriv) > 1 or (len(deriv) == 1 and deriv[0] != 0):
        roots = np.polynomial.polynomial.polyroots(deriv)
        for r in roots:
            if abs(r.imag) < 1e-9 and -1e-12 <= r.real <= 1 + 1e-12:
                candidates.append(float(min(max(r.real, 0.0), 1.0)))
    vals = [float(np.polynomial.polynomial.polyval(s, poly)) for s in candidates]
    best = int(np.argmax(vals))
    return vals[best], candidates[best]


def best_deviation(game: Game, profile: StrategyProfile, player: int,
                   infoset_id: str, cfg: Optional[SolverConfig] = None
                   ) -> tuple[Union[Num, float], tuple]:
    """Value and maximizer of sigma -> U(profile deviated to sigma at the
    infoset).  Vertex scan without absentmindedness (exact); polynomial
    root-finding (2 actions) or inner ascent otherwise."""
    cfg = _cfg(cfg)
    iset = game.infoset(infoset_id, player)
    n = len(iset.actions)

    best_val = None
    best_sigma = None
    for a in range(n):
        sig = tuple(Fraction(1) if j == a else Fraction(0) for j in range(n))
        v = expected_utility(game, deviate(profile, infoset_id, sig, player), player)
        if best_val is None or v > best_val:
            best_val, best_sigma = v, sig
    if not _absentminded_at(game, infoset_id, player):
        return best_val, best_sigma

    if n == 2:
        poly = _deviation_polynomial(game, profile, player, infoset_id)
        val, s = _maximize_poly_01(poly)
        if val > float(best_val) + 1e-15:
            return val, (s, 1.0 - s)
        return best_val, best_sigma

    # Small inner ascent over the deviation simplex.
    start_vals = [np.full(n, 1.0 / n)]
    start_vals.extend(np.eye(n))
    best = (float(best_val), best_sigma)
    for s0 in start_vals:
        s = np.array(s0, dtype=float)
        stepsz = 0.25
        for _ in range(200):
            prof = deviate(profile, infoset_id, tuple(float(v) for v in s), player)
            f = float(expected_utility(game, prof, player))
            g = np.array([
                float(utility_gradient(game, prof, player, infoset_id, a))
                for a in range(n)
            ])
            cand = _project_simplex_1d(s + stepsz * g)
            prof2 = deviate(profile, infoset_id, tuple(float(v) for v in cand), player)
            f2 = float(expected_utility(game, prof2, player))
            if f2 > f + 1e-14:
                s = cand
                stepsz *= 1.3
            else:
                stepsz *= 0.5
                if stepsz < 1e-10:
                    break
        prof = deviate(profile, infoset_id, tuple(float(v) for v in s), player)
        f = float(expected_utility(game, prof, player))
        if f > best[0]:
            best = (f, tuple(float(v) for v in s))
    return best


def _project_simplex_1d(v: np.ndarray) -> np.ndarray:
    from .numeric import _project_simplex

    return _project_simplex(v[None, :])[0]


def edt_incentive(game: Game, profile: StrategyProfile, player: int,
                  infoset_id: str, cfg: Optional[SolverConfig] = None) -> float:
    """Best gain from replacing the whole randomized action at one infoset
    (applied at every visit), holding everything else fixed."""
    base = expected_utility(game, profile, player)
    val, _ = best_deviation(game, profile, player, infoset_id, cfg)
    return float(val) - float(base)


def edt_check(game: Game, profile: StrategyProfile,
              eps_eq: Optional[float] = None,
              cfg: Optional[SolverConfig] = None) -> tuple[bool, float]:
    """No single-infoset deviation may gain more than ``eps_eq``."""
    cfg = _cfg(cfg)
    eps = cfg.eps_eq if eps_eq is None else eps_eq
    residual = 0.0
    for player in range(1, game.players + 1):
        for iid in game.infosets.get(player, {}):
            residual = max(residual, edt_incentive(game, profile, player, iid, cfg))
    residual = max(residual, 0.0)
    return residual <= eps, residual


def cdt_utility(game: Game, profile: StrategyProfile, player: int,
                infoset_id: str, sigma: Sequence[Num]) -> Num:
    """First-order (gradient-based) value a causal reasoner assigns to
    deviating to ``sigma`` at the infoset."""
    iset = game.infoset(infoset_id, player)
    base = expected_utility(game, profile, player)
    row = profile[player].row(infoset_id)
    total = base
    for a in range(len(iset.actions)):
        diff = sigma[a] - row[a]
        if diff:
            total = total + diff * utility_gradient(game, profile, player, infoset_id, a)
    return total


def kkt_check(game: Game, profile: StrategyProfile, player: int,
              eps_eq: Optional[float] = None,
              cfg: Optional[SolverConfig] = None) -> tuple[bool, float]:
    """Stationarity over the product of simplices: at every infoset the
    largest gradient entry must be attained on the support."""
    cfg = _cfg(cfg)
    eps = cfg.eps_eq if eps_eq is None else eps_eq
    residual = 0.0
    for iid, iset in game.infosets.get(player, {}).items():
        v = [
            float(utility_gradient(game, profile, player, iid, a))
            for a in range(len(iset.actions))
        ]
        row = profile[player].row(iid)
        supp = [float(p) > cfg.supp_tol for p in row]
        if not any(supp):
            supp = [True] * len(v)
        gap = max(v) - min(x for x, s in zip(v, supp) if s)
        residual = max(residual, gap, 0.0)
    return residual <= eps, residual


def kkt_check_profile(game: Game, profile: StrategyProfile,
                      eps_eq: Optional[float] = None,
                      cfg: Optional[SolverConfig] = None) -> tuple[bool, float]:
    cfg = _cfg(cfg)
    residual = 0.0
    for player in range(1, game.players + 1):
        _, r = kkt_check(game, profile, player, eps_eq, cfg)
        residual = max(residual, r)
    eps = cfg.eps_eq if eps_eq is None else eps_eq
    return residual <= eps, residual


# ---------------------------------------------------------------------------
# Limit-based rationality (schedule verification) and Nash-style refinements
# ---------------------------------------------------------------------------


def _mix_with_uniform(game: Game, strategy: BehavioralStrategy, delta: float
                      ) -> BehavioralStrategy:
    table = {}
    for iid, row in strategy.table.items():
        n = len(row)
        table[iid] = tuple((1.0 - delta) * float(p) + delta / n for p in row)
    return BehavioralStrategy(player=strategy.player, table=table)


def _schedule_accepts(eps_ks: list[float], cfg: SolverConfig) -> bool:
    """Accept a normalized-incentive trace when it decays linearly with the
    mixing rate: fit the slope on the first points, demand the rest stay
    under it (or under the equilibrium tolerance)."""
    deltas = cfg.schedule
    head = [max(e, 0.0) / d for e, d in zip(eps_ks[:5], deltas[:5])]
    C = cfg.schedule_safety * max(head) if head else 0.0
    return all(
        e <= max(cfg.eps_eq, C * d) for e, d in zip(eps_ks, deltas)
    )


def edt_rational_check(game: Game, strategy: BehavioralStrategy,
                       cfg: Optional[SolverConfig] = None) -> bool:
    """Finite verification of the limit condition behind EDT rationality:
    mix toward uniform along the schedule and require the reach-normalized
    deviation gains to vanish linearly."""
    cfg = _cfg(cfg)
    if game.players != 1:
        raise ValueError("edt_rational_check expects a single-player game")
    eps_ks = []
    for delta in cfg.schedule:
        mixed = _mix_with_uniform(game, strategy, delta)
        prof = profile_from(mixed)
        worst = 0.0
        for iid in game.infosets.get(1, {}):
            reach = float(infoset_reach(game, prof, iid))
            if reach <= 0.0:
                continue
            gain = edt_incentive(game, prof, 1, iid, cfg)
            worst = max(worst, gain / reach)
        eps_ks.append(worst)
    return _schedule_accepts(eps_ks, cfg)


def cdt_rational_check(game: Game, strategy: BehavioralStrategy,
                       cfg: Optional[SolverConfig] = None) -> bool:
    """Schedule verification of the frequency-normalized, first-order
    (CDT-utility) rationality condition."""
    cfg = _cfg(cfg)
    if game.players != 1:
        raise ValueError("cdt_rational_check expects a single-player game")
    eps_ks = []
    for delta in cfg.schedule:
        mixed = _mix_with_uniform(game, strategy, delta)
        prof = profile_from(mixed)
        worst = 0.0
        for iid, iset in game.infosets.get(1, {}).items():
            freq = float(infoset_frequency(game, prof, iid))
            if freq <= 0.0:
                continue
            v = [
                float(utility_gradient(game, prof, 1, iid, a))
                for a in range(len(iset.actions))
            ]
            row = [float(p) for p in mixed.row(iid)]
            gain = max(v) - sum(p * x for p, x in zip(row, v))
            worst = max(worst, gain / freq)
        eps_ks.append(worst)
    return _schedule_accepts(eps_ks, cfg)


def _rationality_witnesses(game: Game, strategy: BehavioralStrategy,
                           cfg: SolverConfig) -> list[BehavioralStrategy]:
    """The strategy itself plus completions that rewrite unreached rows
    with uniform play or with every pure-action combination (capped).

    All completions are realization-equivalent to the input by
    construction, since only unreached infosets change.
    """
    prof = profile_from(strategy)
    unreached = [
        iid
        for iid in sorted(game.infosets.get(1, {}))
        if float(infoset_reach(game, prof, iid)) <= cfg.supp_tol
    ]
    witnesses = [strategy]
    if not unreached:
        return witnesses
    uniform_rows = {
        iid: uniform_strategy(game, 1).row(iid) for iid in unreached
    }
    w = strategy
    for iid in unreached:
        w = w.replace_row(iid, uniform_rows[iid])
    witnesses.append(w)
    sizes = [len(game.infosets[1][iid].actions) for iid in unreached]
    combos = itertools.product(*[range(s) for s in sizes])
    for combo in itertools.islice(combos, cfg.witness_cap):
        w = strategy
        for iid, a in zip(unreached, combo):
            n = len(game.infosets[1][iid].actions)
            row = tuple(Fraction(1) if j == a else Fraction(0) for j in range(n))
            w = w.replace_row(iid, row)
        witnesses.append(w)
    return witnesses


def edt_nash_check(game: Game, profile: StrategyProfile,
                   cfg: Optional[SolverConfig] = None) -> bool:
    """EDT equilibrium plus, per player, realization equivalence to an
    EDT-rational strategy in the opponent-fixed single-player view.

    The witness search covers the strategy itself and canonical rewrites
    of unreached infosets; it is sound but not complete.
    """
    cfg = _cfg(cfg)
    ok, _ = edt_check(game, profile, cfg.eps_eq, cfg)
    if not ok:
        return False
    for player in range(1, game.players + 1):
        sub = fix_opponents(game, profile, player)
        s1 = profile[player].as_player(1)
        witnesses = _rationality_witnesses(sub, s1, cfg)
        if not any(edt_rational_check(sub, w, cfg) for w in witnesses):
            return False
    return True


def cdt_nash_check(game: Game, profile: StrategyProfile,
                   cfg: Optional[SolverConfig] = None) -> bool:
    """KKT everywhere plus realization equivalence to a CDT-rational
    strategy per player (same canonical witness search)."""
    cfg = _cfg(cfg)
    ok, _ = kkt_check_profile(game, profile, cfg.eps_eq, cfg)
    if not ok:
        return False
    for player in range(1, game.players + 1):
        sub = fix_opponents(game, profile, player)
        s1 = profile[player].as_player(1)
        witnesses = _rationality_witnesses(sub, s1, cfg)
        if not any(cdt_rational_check(sub, w, cfg) for w in witnesses):
            return False
    return True


def nash_check(game: Game, profile: StrategyProfile,
               cfg: Optional[SolverConfig] = None) -> tuple[bool, float, str]:
    """Compare each player's payoff with an exact best response computed by
    solving the opponent-fixed single-player game."""
    cfg = _cfg(cfg)
    residual = 0.0
    certified = "exact"
    for player in range(1, game.players + 1):
        sub = fix_opponents(game, profile, player)
        report = optimal_strategy(sub, cfg)
        if report.certified != "exact":
            certified = report.certified
        mine = float(expected_utility(game, profile, player))
        residual = max(residual, float(report.utilities[0]) - mine)
    residual = max(residual, 0.0)
    return residual <= cfg.eps_eq, residual, certified


# ---------------------------------------------------------------------------
# Equilibrium enumeration and best/worst selection
# ---------------------------------------------------------------------------


def _pure_seed_vectors(index: FlatIndex, cfg: SolverConfig, rng) -> tuple[list[np.ndarray], bool]:
    sizes = [r.size for r in index.rows]
    total = math.prod(sizes) if sizes else 1
    if total <= cfg.enum_pure_cap:
        out = []
        for combo in itertools.product(*[range(s) for s in sizes]):
            x = np.zeros(index.dim)
            for row, a in zip(index.rows, combo):
                x[row.offset + a] = 1.0
            out.append(x)
        return out, True
    return _random_vertices(index, rng, cfg.enum_pure_samples), False


def _br_polish(num: NumericGame, X: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Improving-deviation dynamics, batched over seeds: sweep the infoset
    rows, replacing a row by its best pure deviation whenever that strictly
    gains.  Monotone in single-player games; capped sweeps otherwise."""
    X = project_rows(num.index, X)
    for _ in range(cfg.polish_iters):
        changed = False
        for row in num.index.rows:
            vals = num.deviation_values_pure(X, row)
            base = num.utility(X, row.player)
            best = vals.argmax(axis=1)
            gain = vals[np.arange(len(X)), best] - base
            upd = gain > 1e-11
            if np.any(upd):
                changed = True
                block = slice(row.offset, row.offset + row.size)
                X[upd, block] = 0.0
                X[upd, row.offset + best[upd]] = 1.0
        if not changed:
            break
    return X


def _gradient_polish(num: NumericGame, X: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Per-player projected gradient dynamics toward KKT points."""
    X = project_rows(num.index, X)
    B = X.shape[0]
    players = range(1, num.game.players + 1)
    blocks = {
        p: [r for r in num.index.rows if r.player == p] for p in players
    }
    step = {p: np.full(B, 0.25) for p in players}
    active = np.ones(B, dtype=bool)
    for _ in range(cfg.polish_iters):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        sub = X[idx]
        settled = num.kkt_residuals(sub, cfg.supp_tol) < 1e-11
        stuck = np.ones(len(idx), dtype=bool)
        for p in players:
            stuck &= step[p][idx] < 1e-12
        active[idx[settled | stuck]] = False
        idx = idx[~(settled | stuck)]
        if len(idx) == 0:
            continue
        for p in players:
            if not blocks[p]:
                continue
            A = X[idx]
            G = num.gradient(A, p)
            D = np.zeros_like(A)
            for r in blocks[p]:
                D[:, r.offset : r.offset + r.size] = G[:, r.offset : r.offset + r.size]
            Y = project_rows(num.index, A + step[p][idx, None] * D)
            improved = num.utility(Y, p) > num.utility(A, p) + 1e-14
            X[idx[improved]] = Y[improved]
            step[p][idx[improved]] *= 1.2
            step[p][idx[~improved]] *= 0.5
    return X


def _mixed_br_polish(game: Game, num: NumericGame, x: np.ndarray,
                     cfg: SolverConfig) -> np.ndarray:
    """Mixed best-response sweeps for absentminded games: each step replaces
    the most profitable row by its exact best randomized action."""
    prof = num.index.profile(x)
    for _ in range(cfg.polish_iters):
        best_gain, best_iid, best_sigma, best_player = 0.0, None, None, None
        base = {
            p: float(expected_utility(game, prof, p))
            for p in range(1, game.players + 1)
        }
        for row in num.index.rows:
            val, sigma = best_deviation(game, prof, row.player, row.infoset_id, cfg)
            gain = float(val) - base[row.player]
            if gain > best_gain + 1e-12:
                best_gain, best_iid, best_sigma, best_player = gain, row.infoset_id, sigma, row.player
        if best_iid is None or best_gain <= 1e-11:
            break
        prof = deviate(prof, best_iid, best_sigma, best_player)
    return num.index.vector(prof)


def _residuals_for(game: Game, num: NumericGame, X: np.ndarray, concept: str,
                   cfg: SolverConfig) -> np.ndarray:
    base = "CDT" if concept in ("CDT", "CDT-NASH") else "EDT"
    if base == "CDT":
        return num.kkt_residuals(X, cfg.supp_tol)
    res = num.edt_pure_residuals(X)
    if any(
        has_absentmindedness(game, p) for p in range(1, game.players + 1)
    ):
        # Pure deviations underestimate mixed ones; redo survivors exactly.
        for i in np.nonzero(res <= cfg.eps_eq)[0]:
            prof = num.index.profile(X[i])
            _, res[i] = edt_check(game, prof, cfg.eps_eq, cfg)
    return res


def enumerate_equilibria(game: Game, concept: str,
                         cfg: Optional[SolverConfig] = None) -> list[SolveReport]:
    """Seed, polish, filter, dedup: return one report per equilibrium class
    found, sorted by Player 1's utility.

    Classes are realization-equivalence classes; the representative is the
    member with the smallest residual.  Only profiles that individually
    pass the concept's residual/filters are ever admitted, so every report
    is sound; completeness is only as good as the seeding, hence the
    certification flag.
    """
    cfg = _cfg(cfg)
    concept = concept.upper()
    if concept not in CONCEPTS or concept == "OPT":
        raise ValueError(f"unknown enumeration concept {concept!r}")
    num = NumericGame(game)
    if num.index.dim > cfg.enum_dim_cap:
        raise CapExceededError(
            f"flattened strategy dimension {num.index.dim} exceeds cap "
            f"{cfg.enum_dim_cap}; shrink the instance"
        )
    rng = cfg.rng()

    pure_seeds, pure_full = _pure_seed_vectors(num.index, cfg, rng)
    grid_seeds, grid_full = _grid_points(num.index, cfg, rng)
    seeds = pure_seeds + grid_seeds + _random_mixed(num.index, rng, cfg.multistart)
    seeds.append(num.index.uniform())
    if game.players == 1:
        try:
            seeds.append(num.index.vector(optimal_strategy(game, cfg).profile))
        except (ValueError, CapExceededError):
            pass
    X = np.array(seeds)

    if concept in ("CDT", "CDT-NASH"):
        X = _gradient_polish(num, X, cfg)
    else:
        X = _br_polish(num, X, cfg)
        if game.players == 1 and has_absentmindedness(game, 1):
            res = _residuals_for(game, num, X, concept, cfg)
            stalled = np.nonzero(res > cfg.eps_eq)[0]
            seen = set()
            for i in stalled[: 2 * cfg.grid_samples]:
                key = tuple(np.round(X[i], 4))
                if key in seen:
                    continue
                seen.add(key)
                X[i] = _mixed_br_polish(game, num, X[i], cfg)

    res = _residuals_for(game, num, X, concept, cfg)
    keep = np.nonzero(res <= cfg.eps_eq)[0]
    if len(keep) == 0:
        return []

    # Drop candidates that polished to numerically identical vectors.
    rounded = np.round(X[keep], 10)
    _, first = np.unique(rounded, axis=0, return_index=True)
    keep = keep[np.sort(first)]

    # Dedup by realization equivalence: greedy clustering of node-reach
    # vectors against class representatives, lowest residual first.
    node_order = sorted(game.nodes)
    reaches = np.empty((len(keep), len(node_order)))
    for j, i in enumerate(keep):
        rm = node_reach_map(game, num.index.profile(X[i]))
        reaches[j] = [float(rm[n]) for n in node_order]
    order = sorted(
        range(len(keep)),
        key=lambda j: (res[keep[j]], tuple(np.round(X[keep[j]], 9))),
    )
    rep_rows: list[int] = []
    for j in order:
        for r in rep_rows:
            if np.abs(reaches[j] - reaches[r]).max() <= cfg.dedup_tol:
                break
        else:
            rep_rows.append(j)

    reports = []
    certified = (
        f"grid-certified(delta=1/{cfg.grid_resolution})"
        if pure_full and grid_full
        else "heuristic"
    )
    for j in rep_rows:
        idx = keep[j]
        prof = num.index.profile(X[idx])
        if concept == "NASH":
            ok, nres, ncert = nash_check(game, prof, cfg)
            if not ok:
                continue
            rep_res = max(float(res[idx]), nres)
            rep_cert = certified if ncert == "exact" else "heuristic"
        elif concept == "EDT-NASH":
            if not edt_nash_check(game, prof, cfg):
                continue
            rep_res, rep_cert = float(res[idx]), certified
        elif concept == "CDT-NASH":
            if not cdt_nash_check(game, prof, cfg):
                continue
            rep_res, rep_cert = float(res[idx]), certified
        else:
            rep_res, rep_cert = float(res[idx]), certified
        reports.append(
            SolveReport(
                concept=concept,
                which="any",
                profile=prof,
                utilities=_profile_utilities(game, prof),
                residual=rep_res,
                certified=rep_cert,
            )
        )
    reports.sort(key=lambda r: (float(r.utilities[0]), r.residual))
    return reports


def best_worst(game: Game, concept: str, which: str,
               cfg: Optional[SolverConfig] = None) -> SolveReport:
    """Extremal Player-1 utility over the found equilibrium classes."""
    cfg = _cfg(cfg)
    concept = concept.upper()
    if which not in ("best", "worst"):
        raise ValueError(f"selector must be 'best' or 'worst', got {which!r}")
    if concept == "OPT":
        report = optimal_strategy(game, cfg)
        return replace(report, which=which)
    found = enumerate_equilibria(game, concept, cfg)
    if not found:
        raise EquilibriumNotFoundError(
            f"no {concept} equilibrium found at resolution "
            f"delta=1/{cfg.grid_resolution}"
        )
    chosen = found[-1] if which == "best" else found[0]
    return replace(chosen, which=which)
