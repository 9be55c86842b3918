"""Constraint tuning for timed automata.

Find a minimum set of simple clock constraints whose removal makes a target
location reachable, a minimum set that must remain to keep an unsafe location
unreachable, and optimal integer relaxations of either, backed by a
zone-based reachability verifier and a SAT-backed candidate store.
"""

from .benchgen import PeriodicRestriction, generate_scheduler, restriction_sets
from .engine import (
    MsmpResult,
    Stats,
    enlarge,
    enumerate_all,
    find_iseed,
    find_sseed,
    is_conflicting,
    is_critical,
    minimum_mg,
    minimum_msr,
    reduction_core,
    shrink,
)
from .errors import (
    AlreadyReachable,
    BudgetExceeded,
    InfeasibleSystem,
    InsufficientInput,
    InvalidParams,
    LimitExceeded,
    NonMonotoneOracle,
    NoStructuralPath,
    ParseError,
    SemanticError,
    SufficientInput,
    TatunerError,
)
from .model import (
    INFINITY,
    ConstraintTable,
    Model,
    Reduction,
    SimpleConstraint,
    TimedAutomaton,
    apply_reduction,
    apply_relaxation,
    complement_guarantee,
    normalize_atom,
    parse_model,
    serialize_model,
)
from .relax import (
    DifferenceSystem,
    RelaxOutcome,
    build_difference_system,
    feasible,
    gamma,
    max_total_relaxation,
    min_total_relaxation_global,
    min_total_relaxation_milp,
    monotone_lattice_optimize,
    realize_delays,
    robustness_degree,
)
from .symstore import CnfStore
from .verifier import (
    Inconclusive,
    Reachable,
    Unreachable,
    WitnessPath,
    canonicalize,
    check_reachability,
    successor,
)

__version__ = "0.1.0"
