"""Policy descent tree search: the exact Pareto set of safe explicable policies.

The search starts from the agent-optimal policy and only expands single-action
changes that cannot raise any agent-model value (``Q(s, a) <= Q(s, pi(s))``).
Children that break the safety bound are cut together with their subtrees;
every feasible child is offered to the Pareto archive under human-model values.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from .archive import ParetoArchive, SearchStats
from .errors import SearchCapExceeded
from .mdp import Policy, SepProblem, _evaluate, q_values
from .safety import DEFAULT_EPS, PrunedActionSets, optimal_reference, search_action_sets
from .space import SearchSpace

log = logging.getLogger(__name__)

MAX_EVALUATIONS = 10**7


def descend_candidates(
    problem: SepProblem,
    pi: Policy,
    v_pi_agent: np.ndarray,
    allowed: PrunedActionSets | None = None,
    eps: float = DEFAULT_EPS,
) -> list[tuple[int, int]]:
    """All ``(s, a)`` with ``a`` allowed, ``a != pi(s)`` and a non-increasing agent Q.

    Ordered by state id, then action id. ``allowed=None`` means the full
    action sets.
    """
    sets = problem.actions if allowed is None else allowed.allowed
    q = q_values(problem.agent_model, v_pi_agent)
    out = []
    for s, acts in enumerate(sets):
        cur = pi[s]
        for a in acts:
            if a != cur and q[s, a] <= q[s, cur] + eps:
                out.append((s, a))
    return out


def _descent_search(
    problem: SepProblem,
    space: SearchSpace,
    root: tuple[int, ...],
    eps: float,
    max_evaluations: int,
    clustered: bool = False,
) -> tuple[ParetoArchive, SearchStats]:
    t0 = time.perf_counter()
    agent, human = problem.agent_model, problem.human_model
    v_star, _ = optimal_reference(problem)
    threshold = problem.delta * v_star - eps
    reps = space.representatives
    stats = SearchStats()
    archive = ParetoArchive(eps)

    def record(key, v_agent):
        v_human = _evaluate(human, space.lift(key))
        archive.add(Policy(space.lift(key)), v_human, v_agent, Policy(key) if clustered else None)

    v_root = _evaluate(agent, space.lift(root))
    stats.policies_evaluated = 1
    if not np.all(v_root >= threshold):
        stats.extra["root_feasible"] = False
        stats.wall_time = time.perf_counter() - t0
        return archive, stats
    record(root, v_root)

    fringe: list[tuple[tuple[int, ...], np.ndarray]] = [(root, v_root)]
    visited = {root}
    while fringe:
        key, v_agent = fringe.pop()
        stats.policies_expanded += 1
        q = q_values(agent, v_agent)
        for k, acts in enumerate(space.allowed):
            r, cur = reps[k], key[k]
            limit = q[r, cur] + eps
            for a in acts:
                if a == cur or q[r, a] > limit:
                    continue
                child = key[:k] + (a,) + key[k + 1:]
                if child in visited:
                    stats.pruned_by_visited += 1
                    continue
                visited.add(child)
                if stats.policies_evaluated >= max_evaluations:
                    stats.converged = False
                    stats.wall_time = time.perf_counter() - t0
                    raise SearchCapExceeded(
                        f"descent search stopped after {stats.policies_evaluated} evaluations", archive, stats
                    )
                v_child = _evaluate(agent, space.lift(child))
                stats.policies_evaluated += 1
                if not np.all(v_child >= threshold):
                    stats.pruned_by_bound += 1
                    continue
                fringe.append((child, v_child))
                record(child, v_child)
                log.debug("expand %s via coord %d -> %d (archive %d)", key, k, a, len(archive))
    stats.wall_time = time.perf_counter() - t0
    return archive, stats


def pdt_search(
    problem: SepProblem,
    use_pruning: bool = True,
    eps: float = DEFAULT_EPS,
    max_evaluations: int = MAX_EVALUATIONS,
) -> tuple[ParetoArchive, SearchStats]:
    """Exact Pareto set via policy descent from ``pi*`` (PDT+, or PDT without pruning).

    Each policy is evaluated at most once: children already seen are skipped.
    Raises :class:`SearchCapExceeded` (carrying the partial archive) once
    ``max_evaluations`` policies have been evaluated.
    """
    _, pi_star = optimal_reference(problem)
    sets = search_action_sets(problem, use_pruning, eps)
    space = SearchSpace.ground(sets)
    return _descent_search(problem, space, tuple(pi_star.choice), eps, max_evaluations)
