"""Pulse-coupled oscillators on uni- and bidirectional cycle graphs."""
from .analysis import (
    DistanceVector,
    StateTag,
    WorstCase,
    classify,
    critical_sweep,
    distance_vector,
    equilibrium_gamma,
    is_synchronized,
    transition_matrix,
    worst_case_state,
)
from .engine import (
    CascadeOrder,
    HybridTrajectory,
    RunOutcome,
    SimulationConfig,
    Verdict,
    flow,
    next_fire_time,
    resolve_cascade,
    run,
)
from .exceptions import (
    ConvergenceError,
    DegenerateCaseError,
    DomainError,
    EngineInvariantError,
    PcoError,
    PreconditionError,
)
from .model import (
    TWO_PI,
    CycleTopology,
    DeltaCase,
    Direction,
    PhaseState,
    PrcSpec,
    TiePolicy,
    apply_jump,
    critical_coupling,
    evaluate_prc,
    solve_delta,
)
from .rng import SplitMix64

__version__ = "0.1.0"

__all__ = [
    "SplitMix64",
    "__version__",
    "DistanceVector",
    "StateTag",
    "WorstCase",
    "classify",
    "critical_sweep",
    "distance_vector",
    "equilibrium_gamma",
    "is_synchronized",
    "transition_matrix",
    "worst_case_state",
    "CascadeOrder",
    "HybridTrajectory",
    "RunOutcome",
    "SimulationConfig",
    "Verdict",
    "flow",
    "next_fire_time",
    "resolve_cascade",
    "run",
    "ConvergenceError",
    "DegenerateCaseError",
    "DomainError",
    "EngineInvariantError",
    "PcoError",
    "PreconditionError",
    "TWO_PI",
    "CycleTopology",
    "DeltaCase",
    "Direction",
    "PhaseState",
    "PrcSpec",
    "TiePolicy",
    "apply_jump",
    "critical_coupling",
    "evaluate_prc",
    "solve_delta",
]
