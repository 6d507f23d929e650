"""Identity-blind online selection for the prophet-inequality problem.

A box model with finite discrete value distributions, arrival orders, and
priors over orders; single-threshold and history-dependent policies that
never see box identities; exact and Monte Carlo evaluators for the
max-expectation and max-probability objectives; order-aware and
identity-blind optimal policies by dynamic programming; and adversarial
instance generators that pin down how much the blindness costs.
"""

from .core import (
    ArrivalOrder,
    BlindGapError,
    DegenerateInstanceError,
    DiscreteDistribution,
    EMPTY_TRAIL,
    Instance,
    OrderPrior,
    SizeLimitError,
    Trail,
    ZERO_BOX,
    ZeroRun,
    expected_max,
    max_cdf,
    max_point_mass,
)
from .constants import (
    GapConstants,
    constants_report,
    golden_bound,
    solve_lambda_rho_gamma,
    solve_mu_deterministic,
    solve_mu_single_threshold,
)
from .policies import (
    GreedyPositivePolicy,
    MAX_EXP,
    MAX_PROB,
    Policy,
    SkipThenGreedyPolicy,
    ThresholdPolicy,
    effective_lambda,
    find_threshold,
    gap_optimal_policy,
    one_over_e_policy,
    policy_from_descriptor,
    prophet_half_policy,
)
from .evaluation import (
    EvalResult,
    GapReport,
    accept_position_probs,
    evaluate,
    evaluate_exact,
    evaluate_mc,
    gap,
)
from .optimal import (
    HistoryPolicy,
    OrderAwareMaxExpPolicy,
    OrderAwareMaxProbPolicy,
    opt_identity_blind,
    opt_order_aware_maxexp,
    opt_order_aware_maxprob,
)
from .adversary import (
    AdversaryTranscript,
    adaptive_adversary,
    bernoulli_ladder,
    ladder_orders,
    maxexp_hardness,
    point_mass_instances,
    random_instance,
    three_box_example,
)
from .repro import REPRO_TARGETS, CheckRow

__all__ = [
    "ArrivalOrder",
    "AdversaryTranscript",
    "BlindGapError",
    "CheckRow",
    "DegenerateInstanceError",
    "DiscreteDistribution",
    "EMPTY_TRAIL",
    "EvalResult",
    "GapConstants",
    "GapReport",
    "GreedyPositivePolicy",
    "HistoryPolicy",
    "Instance",
    "MAX_EXP",
    "MAX_PROB",
    "OrderAwareMaxExpPolicy",
    "OrderAwareMaxProbPolicy",
    "OrderPrior",
    "Policy",
    "REPRO_TARGETS",
    "SizeLimitError",
    "SkipThenGreedyPolicy",
    "ThresholdPolicy",
    "Trail",
    "ZERO_BOX",
    "ZeroRun",
    "accept_position_probs",
    "adaptive_adversary",
    "bernoulli_ladder",
    "constants_report",
    "effective_lambda",
    "evaluate",
    "evaluate_exact",
    "evaluate_mc",
    "expected_max",
    "find_threshold",
    "gap",
    "gap_optimal_policy",
    "golden_bound",
    "ladder_orders",
    "max_cdf",
    "max_point_mass",
    "maxexp_hardness",
    "one_over_e_policy",
    "opt_identity_blind",
    "opt_order_aware_maxexp",
    "opt_order_aware_maxprob",
    "point_mass_instances",
    "policy_from_descriptor",
    "prophet_half_policy",
    "random_instance",
    "three_box_example",
]
