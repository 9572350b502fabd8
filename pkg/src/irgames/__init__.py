"""Imperfect-recall extensive-form games: recall refinements, equilibrium
concepts, and the value of recall with its structural bounds."""

from .game import (
    CHANCE,
    TERMINAL,
    Game,
    Infoset,
    Node,
    ObservationSequence,
    chance_nodes,
    first_visit_nodes,
    has_absentmindedness,
    make_game,
    obs,
    obs_i,
    seq,
    validate_game,
)
from .recall import (
    RefinementPlan,
    check_coarsest,
    dummy_node_transform,
    full_information_refinement,
    has_perfect_recall,
    perfect_recall_refinement,
    perfect_recall_refinement_all,
    refines,
)
from .strategies import (
    BehavioralStrategy,
    StrategyProfile,
    deviate,
    expected_utility,
    fix_opponents,
    infoset_frequency,
    infoset_reach,
    lift_strategy,
    profile_from,
    pure_strategy,
    reach_probability,
    realization_equivalent,
    uniform_profile,
    uniform_strategy,
    utility_gradient,
)
from .solvers import (
    SolveReport,
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
    nash_check,
    optimal_strategy,
)

__version__ = "0.1.0"
