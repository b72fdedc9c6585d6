"""Online bipartite matching on (k,d)-bounded graphs.

RANKING and the OCS-based algorithm with optimal candidate functions, the
hard instance families, exact expectation oracles and closed-form bounds.
"""

from .analysis import BoundsRow, bounds_table, eta, gamma, kd_ocs_lb, kd_ranking_ub
from .candidate import (
    CandidateFunction,
    GBoundSeries,
    g_bound,
    geometric_candidate,
    ghhnyz_candidate,
    min_alpha_certified,
    optimal_candidate,
    verify_candidate,
)
from .engines import RankAssignment, run_greedy, run_ocs, run_random, run_ranking
from .exact import markov_expected_matched, ocs_exact, ranking_exact, ranking_exact_smalld, sample_g
from .generators import (
    gen_cycle,
    gen_general_ranking_hard,
    gen_kd_ranking_hard,
    gen_small_d_ranking_hard,
    gen_toy,
    gen_two_phase_adversary,
)
from .instance import UNMATCHED, Instance, MatchingOutcome, offline_optimum, validate_instance
from .seeding import SplitMix64
from .sim import AlgoSpec, SimReport, compare, run_trials

__version__ = "0.1.0"
