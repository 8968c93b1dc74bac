"""Safe explicable planning: policies that stay close to optimal for the agent's
true model while looking as good as possible under the human's model of it."""

from .aggregation import (
    Aggregation,
    ClusterPolicy,
    aggregated_brute_force,
    aggregated_search,
    cluster_action_sets,
    lift,
)
from .archive import ArchiveEntry, ParetoArchive, SearchStats
from .brute_force import bf_pareto, enumerate_policies, pareto_filter, policy_count
from .errors import CapExceededError, InfeasibleRootError, SearchCapExceeded
from .mdp import (
    InvalidMdpError,
    Mdp,
    Policy,
    SepProblem,
    Step,
    Trajectory,
    evaluate_many,
    greedy_policy,
    policy_evaluation,
    q_value,
    q_values,
    simulate,
    strictly_dominates,
    value_iteration,
)
from .pag import ascend_step, pag_search
from .pdt import descend_candidates, pdt_search
from .safety import (
    PrunedActionSets,
    bound_violations,
    eta_factor,
    feasible_set,
    optimal_reference,
    prune_actions,
    prune_actions_eta,
    satisfies_bound,
    search_action_sets,
)
from .space import SearchSpace

__version__ = "0.1.0"

__all__ = [
    "Aggregation",
    "ArchiveEntry",
    "CapExceededError",
    "ClusterPolicy",
    "InfeasibleRootError",
    "InvalidMdpError",
    "Mdp",
    "ParetoArchive",
    "Policy",
    "PrunedActionSets",
    "SearchCapExceeded",
    "SearchSpace",
    "SearchStats",
    "SepProblem",
    "Step",
    "Trajectory",
    "aggregated_brute_force",
    "aggregated_search",
    "ascend_step",
    "bf_pareto",
    "bound_violations",
    "cluster_action_sets",
    "descend_candidates",
    "enumerate_policies",
    "eta_factor",
    "evaluate_many",
    "feasible_set",
    "greedy_policy",
    "lift",
    "optimal_reference",
    "pag_search",
    "pareto_filter",
    "pdt_search",
    "policy_count",
    "policy_evaluation",
    "prune_actions",
    "prune_actions_eta",
    "q_value",
    "q_values",
    "satisfies_bound",
    "search_action_sets",
    "simulate",
    "strictly_dominates",
    "value_iteration",
]
