"""Two-group ransomware security game: best responses, equilibria, social optimum, sweeps."""

from .bestresponse import (
    attacker_best_response,
    backup_best_response,
    defender_best_response,
    payment_best_response,
    ransom_best_response,
)
from .model import (
    ABSTAIN,
    AttackerStrategy,
    DefenderProfile,
    DomainError,
    GlobalParams,
    GroupParams,
    ParameterError,
    PayoffReport,
    attacker_expected_payoff,
    org_expected_payoff,
    payoff_report,
)
from .simulate import SimulationConfig, SimulationResult, simulate_stage2
from .solver import (
    OutcomeKind,
    SocialOptimum,
    SolveOutcome,
    best_response_dynamics,
    check_deterrence,
    deterrence_threshold,
    find_equilibrium,
    social_optimum,
    verify_profile,
)

__version__ = "0.1.0"
