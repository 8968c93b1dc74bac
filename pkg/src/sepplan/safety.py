"""Safety bound checks and bound-driven action pruning.

A policy is feasible when its agent-model value is at least ``delta`` times the
optimal agent-model value in every state. Pruning removes, per state, actions
whose one-step deviation from the optimal policy already breaks that bound.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from .mdp import TIE_TOL, Mdp, Policy, SepProblem, evaluate_many, q_values, value_iteration

DEFAULT_EPS = 1e-9
ENUMERATION_CAP = 10**7

_reference_cache: "weakref.WeakKeyDictionary[Mdp, tuple[np.ndarray, Policy]]" = weakref.WeakKeyDictionary()


@dataclass(frozen=True, eq=False)
class PrunedActionSets:
    """Per-state allowed actions together with the optimal reference they came from."""

    allowed: tuple[tuple[int, ...], ...]
    reference_v: np.ndarray
    reference_policy: Policy

    def __len__(self) -> int:
        return len(self.allowed)

    def __getitem__(self, s: int) -> tuple[int, ...]:
        return self.allowed[s]

    @property
    def policy_count(self) -> int:
        """Size of the induced policy space (an exact Python int)."""
        return prod(len(a) for a in self.allowed)

    def to_dict(self) -> dict[str, list[int]]:
        return {str(s): list(acts) for s, acts in enumerate(self.allowed)}


def optimal_reference(problem: SepProblem) -> tuple[np.ndarray, Policy]:
    """``(V*, pi*)`` of the agent model, memoised per model object."""
    mdp = problem.agent_model
    if mdp not in _reference_cache:
        v, pi = value_iteration(mdp)
        v.setflags(write=False)
        _reference_cache[mdp] = (v, pi)
    return _reference_cache[mdp]


def satisfies_bound(problem: SepProblem, v_pi: np.ndarray, v_star: np.ndarray, eps: float = DEFAULT_EPS) -> bool:
    v_pi = np.asarray(v_pi, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    if v_pi.shape != v_star.shape:
        raise ValueError(f"value vectors differ in shape: {v_pi.shape} vs {v_star.shape}")
    return bool(np.all(v_pi >= problem.delta * v_star - eps))


def bound_violations(problem: SepProblem, v_pi: np.ndarray, v_star: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    """State ids where the bound fails."""
    return np.flatnonzero(np.asarray(v_pi) < problem.delta * np.asarray(v_star) - eps)


def _prune(problem: SepProblem, factor: float, eps: float) -> PrunedActionSets:
    v_star, pi_star = optimal_reference(problem)
    q = q_values(problem.agent_model, v_star)
    best = q.max(axis=1, keepdims=True)
    keep = (q >= factor * best - eps) | (q >= best - TIE_TOL)
    keep &= problem.agent_model.action_mask
    allowed = tuple(tuple(int(a) for a in np.flatnonzero(row)) for row in keep)
    return PrunedActionSets(allowed, v_star, pi_star)


def prune_actions(problem: SepProblem, eps: float = DEFAULT_EPS) -> PrunedActionSets:
    """Keep ``a`` in ``s`` iff ``Q*(s, a) >= delta * max_a' Q*(s, a') - eps``.

    Optimal actions are always kept, so no set is ever empty (this matters only
    when ``V*(s) < 0``, where no policy can meet a bound ``delta < 1`` anyway).
    """
    return _prune(problem, problem.delta, eps)


def eta_factor(discount: float, delta: float) -> float:
    return 1.0 - (1.0 - discount) * (1.0 - delta)


def prune_actions_eta(problem: SepProblem, eps: float = DEFAULT_EPS) -> PrunedActionSets:
    """Stricter pruning with ``eta = 1 - (1 - gamma)(1 - delta)`` in place of ``delta``.

    Used for ablations only: it can discard actions of feasible policies.
    """
    return _prune(problem, eta_factor(problem.agent_model.discount, problem.delta), eps)


def search_action_sets(problem: SepProblem, use_pruning: bool = True, eps: float = DEFAULT_EPS):
    """Per-state action sets that the searches branch over.

    Terminal states keep only their ``pi*`` action: no choice there changes any
    value, so the other actions would only multiply every policy into copies.
    """
    v_star, pi_star = optimal_reference(problem)
    sets = prune_actions(problem, eps).allowed if use_pruning else problem.actions
    terminals = problem.agent_model.terminals
    return tuple((pi_star[s],) if s in terminals else tuple(acts) for s, acts in enumerate(sets))


def feasible_set(
    problem: SepProblem,
    action_sets: Sequence[Sequence[int]],
    eps: float = DEFAULT_EPS,
    cap: int = ENUMERATION_CAP,
    batch: int = 4096,
) -> list[tuple[Policy, np.ndarray]]:
    """Every policy over ``action_sets`` that meets the bound, with its agent value.

    Exhaustive; meant as a test oracle on small problems.
    """
    from .brute_force import enumerate_policies

    v_star, _ = optimal_reference(problem)
    out: list[tuple[Policy, np.ndarray]] = []
    chunk: list[Policy] = []

    def flush() -> None:
        values = evaluate_many(problem.agent_model, np.array([p.choice for p in chunk]))
        ok = np.all(values >= problem.delta * v_star - eps, axis=1)
        out.extend((p, v) for p, v, good in zip(chunk, values, ok) if good)
        chunk.clear()

    for pol in enumerate_policies(action_sets, cap=cap):
        chunk.append(pol)
        if len(chunk) == batch:
            flush()
    if chunk:
        flush()
    return out
