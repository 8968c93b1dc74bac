"""Exhaustive baselines (BF / BF+) and the correctness oracle for the searches."""

from __future__ import annotations

import itertools
import time
from math import prod
from typing import Iterator, Sequence

import numpy as np

from .archive import ParetoArchive, SearchStats
from .errors import CapExceededError
from .mdp import Policy, SepProblem, evaluate_many
from .safety import DEFAULT_EPS, ENUMERATION_CAP, optimal_reference, search_action_sets
from .space import SearchSpace


def policy_count(action_sets: Sequence[Sequence[int]]) -> int:
    return prod(len(a) for a in action_sets)


def enumerate_policies(action_sets: Sequence[Sequence[int]], cap: int = ENUMERATION_CAP) -> Iterator[Policy]:
    """Every policy over ``action_sets`` exactly once, in lexicographic order."""
    n = policy_count(action_sets)
    if n > cap:
        raise CapExceededError(f"{n} policies exceed the enumeration cap of {cap}", n)
    for choice in itertools.product(*(sorted(a) for a in action_sets)):
        yield Policy(choice)


def pareto_filter(values: np.ndarray, eps: float = DEFAULT_EPS) -> list[int]:
    """Indices of rows not strictly dominated by any other row.

    Rows are swept in order of decreasing coordinate sum, so a row can only be
    dominated by rows already on the front (up to ``eps`` slack, which is also
    re-checked in reverse). Ties are all kept. Returned indices are ascending.
    """
    V = np.asarray(values, dtype=float)
    if len(V) == 0:
        return []
    order = np.lexsort((np.arange(len(V)), -V.sum(axis=1)))
    front: list[int] = []
    for i in order:
        v = V[i]
        if front:
            F = V[front]
            if np.any(np.all(F >= v - eps, axis=1) & np.any(F > v + eps, axis=1)):
                continue
            beaten = np.all(v >= F - eps, axis=1) & np.any(v > F + eps, axis=1)
            if beaten.any():
                front = [f for f, b in zip(front, beaten) if not b]
        front.append(int(i))
    return sorted(front)


def _exhaustive(
    problem: SepProblem,
    space: SearchSpace,
    eps: float,
    cap: int,
    batch: int,
    clustered: bool = False,
) -> tuple[ParetoArchive, SearchStats]:
    t0 = time.perf_counter()
    v_star, _ = optimal_reference(problem)
    threshold = problem.delta * v_star - eps
    stats = SearchStats()
    keys: list[tuple[int, ...]] = []
    v_agents: list[np.ndarray] = []
    chunk: list[tuple[int, ...]] = []

    def flush() -> None:
        grounds = np.array([space.lift(k) for k in chunk])
        va = evaluate_many(problem.agent_model, grounds)
        ok = np.all(va >= threshold, axis=1)
        for key, v, good in zip(chunk, va, ok):
            if good:
                keys.append(key)
                v_agents.append(v)
            else:
                stats.pruned_by_bound += 1
        stats.policies_evaluated += len(chunk)
        chunk.clear()

    for pol in enumerate_policies(space.allowed, cap=cap):
        chunk.append(pol.choice)
        if len(chunk) == batch:
            flush()
    if chunk:
        flush()
    stats.policies_expanded = stats.policies_evaluated

    archive = ParetoArchive(eps)
    if keys:
        vh = evaluate_many(problem.human_model, np.array([space.lift(k) for k in keys]))
        for i in pareto_filter(vh, eps):
            key = keys[i]
            archive.add(Policy(space.lift(key)), vh[i], v_agents[i], Policy(key) if clustered else None)
    stats.extra["feasible"] = len(keys)
    stats.wall_time = time.perf_counter() - t0
    return archive, stats


def bf_pareto(
    problem: SepProblem,
    use_pruning: bool = False,
    eps: float = DEFAULT_EPS,
    cap: int = ENUMERATION_CAP,
    batch: int = 4096,
) -> tuple[ParetoArchive, SearchStats]:
    """Pareto set by definition: evaluate everything, keep feasible, drop dominated.

    ``use_pruning`` enumerates the pruned action sets (BF+) instead of the full
    ones (BF). Raises :class:`CapExceededError` before doing any work if the
    policy space is larger than ``cap``.
    """
    space = SearchSpace.ground(search_action_sets(problem, use_pruning, eps))
    return _exhaustive(problem, space, eps, cap, batch)
