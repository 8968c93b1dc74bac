"""Policy ascent greedy search: one safe explicable policy, found cheaply.

Starting from the agent-optimal policy, each sweep visits every allowed
(state, action) pair and tries the ones whose human-model Q-value is at least
the incumbent's. A tentative change is kept only if the agent-model bound still
holds and the human-model values strictly improve somewhere without dropping
anywhere; later candidates in the sweep are judged against the updated
incumbent.
"""

from __future__ import annotations

import logging
import time
from typing import Sequence

import numpy as np

from .archive import SearchStats
from .errors import InfeasibleRootError
from .mdp import Policy, SepProblem, _evaluate, q_value
from .safety import DEFAULT_EPS, PrunedActionSets, optimal_reference, search_action_sets
from .space import SearchSpace

log = logging.getLogger(__name__)


class _Incumbent:
    __slots__ = ("key", "v_agent", "v_human")

    def __init__(self, key, v_agent, v_human):
        self.key, self.v_agent, self.v_human = key, v_agent, v_human


def _try_update(problem, space, inc, k, a, threshold, eps, stats) -> bool:
    # Returns True and mutates ``inc`` when the change at coordinate k is kept.
    human = problem.human_model
    r = space.representatives[k]
    q_new = q_value(human, inc.v_human, r, a)
    q_cur = q_value(human, inc.v_human, r, inc.key[k])
    if q_new < q_cur - eps:
        return False
    child = inc.key[:k] + (a,) + inc.key[k + 1:]
    pi = space.lift(child)
    v_agent = _evaluate(problem.agent_model, pi)
    stats.policies_evaluated += 1
    if not np.all(v_agent >= threshold):
        stats.pruned_by_bound += 1
        return False
    v_human = _evaluate(human, pi)
    # Equal-value swaps would never clear the change flag; demand a strict gain.
    if not (np.all(v_human >= inc.v_human - eps) and np.any(v_human > inc.v_human + eps)):
        return False
    inc.key, inc.v_agent, inc.v_human = child, v_agent, v_human
    return True


def _ascent_search(
    problem: SepProblem,
    space: SearchSpace,
    root: tuple[int, ...],
    eps: float,
    max_sweeps: int,
    order: Sequence[int] | None = None,
) -> tuple[tuple[int, ...], SearchStats]:
    t0 = time.perf_counter()
    v_star, _ = optimal_reference(problem)
    threshold = problem.delta * v_star - eps
    stats = SearchStats()
    pi = space.lift(root)
    v_agent = _evaluate(problem.agent_model, pi)
    stats.policies_evaluated = 1
    if not np.all(v_agent >= threshold):
        raise InfeasibleRootError("the starting policy violates the safety bound; no feasible policy to ascend from")
    inc = _Incumbent(root, v_agent, _evaluate(problem.human_model, pi))
    coords = list(range(space.size)) if order is None else list(order)
    changed = True
    accepted = 0
    while changed:
        if stats.policies_expanded >= max_sweeps:
            stats.converged = False
            log.warning("ascent stopped after %d sweeps; result may not be converged", max_sweeps)
            break
        stats.policies_expanded += 1
        changed = False
        for k in coords:
            for a in space.allowed[k]:
                if a == inc.key[k]:
                    continue
                if _try_update(problem, space, inc, k, a, threshold, eps, stats):
                    changed = True
                    accepted += 1
                    assert np.all(inc.v_agent >= threshold)
                    log.debug("sweep %d: coord %d -> %d", stats.policies_expanded, k, a)
    stats.extra["accepted_updates"] = accepted
    stats.wall_time = time.perf_counter() - t0
    return inc.key, stats


def ascend_step(
    problem: SepProblem,
    pi: Policy,
    allowed: PrunedActionSets | None = None,
    eps: float = DEFAULT_EPS,
) -> tuple[Policy, bool]:
    """One ascent sweep over all states from a feasible ``pi``.

    Returns the updated policy and whether any change was kept.
    """
    v_star, _ = optimal_reference(problem)
    threshold = problem.delta * v_star - eps
    sets = problem.actions if allowed is None else allowed.allowed
    space = SearchSpace.ground(sets)
    key = tuple(pi.choice)
    inc = _Incumbent(key, _evaluate(problem.agent_model, pi.array), _evaluate(problem.human_model, pi.array))
    if not np.all(inc.v_agent >= threshold):
        raise InfeasibleRootError("ascend_step needs a policy that meets the bound")
    stats = SearchStats()
    changed = False
    for k in range(space.size):
        for a in sets[k]:
            if a != inc.key[k] and _try_update(problem, space, inc, k, a, threshold, eps, stats):
                changed = True
    return Policy(inc.key), changed


def pag_search(
    problem: SepProblem,
    use_pruning: bool = True,
    eps: float = DEFAULT_EPS,
    max_sweeps: int = 10_000,
    sweep_seed: int | None = None,
) -> tuple[Policy, SearchStats]:
    """Greedy ascent from ``pi*`` (PAG+, or PAG without pruning) until no change sticks.

    ``sweep_seed`` permutes the state visiting order; ``None`` keeps ascending
    ids. ``stats.converged`` is False if ``max_sweeps`` ran out first.
    """
    _, pi_star = optimal_reference(problem)
    sets = search_action_sets(problem, use_pruning, eps)
    space = SearchSpace.ground(sets)
    order = None
    if sweep_seed is not None:
        order = np.random.default_rng(sweep_seed).permutation(space.size).tolist()
    key, stats = _ascent_search(problem, space, tuple(pi_star.choice), eps, max_sweeps, order)
    return Policy(key), stats
