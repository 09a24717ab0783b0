"""Transfer learning for Neyman-Pearson classification.

Exact population oracles, constrained ERM, adaptive source/target selection,
transfer-exponent fitting, lower-bound constructions and a Monte Carlo harness.
"""

from .adaptive import AdaptiveConfig, TrialResult, adaptive_select, complexity_term, run_adaptive
from .distributions import (
    DiscreteOnPoints,
    Gaussian,
    Mixture,
    PowerLaw,
    Triangular,
    Uniform,
    density,
    kl_divergence,
    measure_of_region,
    sample,
)
from .empirical import ErmConfig, constrained_erm, epsilon0_of
from .errors import *  # noqa: F401,F403
from .exponent import excess_pair, fit_exponent, worst_source_solution
from .harness import RateFit, SweepConfig, fit_rate, run_sweep
from .hypothesis import (
    AllLabelings,
    ExplicitList,
    IntervalUnionPair,
    ThresholdOnSegment,
    empirical_risks,
    evaluate,
    finite_reduction,
    true_risks,
)
from .lowerbound import bernoulli_kl_bound_check, build_instance, gv_packing, verify_instance
from .np_oracle import (
    NPProblem,
    achievable_threshold,
    brute_force_solutions,
    check_equivalence,
    level_set,
    np_solution,
)
from .presets import PRESETS, preset
from .regions import DiscreteLabeling, IntervalUnion
from .scenario import TransferScenario

__version__ = "0.1.0"
