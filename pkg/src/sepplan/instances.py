"""Random small SEP instances for oracle testing and experimentation."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .mdp import Mdp, SepProblem

DISCOUNTS = (0.8, 0.9, 0.95)
DELTAS = (0.7, 0.8, 0.9, 0.95, 1.0)


def random_mdp(
    rng: np.random.Generator,
    n_states: int,
    n_actions: int,
    discount: float,
    reward_range: tuple[float, float] = (0.0, 10.0),
) -> Mdp:
    """Dense random MDP; cubing the uniform draws skews transitions towards a few successors."""
    T = rng.random((n_states, n_actions, n_states)) ** 3
    T /= T.sum(axis=2, keepdims=True)
    R = rng.uniform(*reward_range, size=(n_states, n_actions, n_states))
    return Mdp.from_arrays(T, R, discount)


def random_problem(
    rng: np.random.Generator,
    n_states: int,
    n_actions: int,
    delta: float,
    agent_discount: float = 0.9,
    human_discount: float = 0.9,
) -> SepProblem:
    """Agent and human models drawn independently over the same state and action sets."""
    agent = random_mdp(rng, n_states, n_actions, agent_discount)
    human = random_mdp(rng, n_states, n_actions, human_discount)
    return SepProblem(agent, human, delta, {"domain": "random"})


def battery(
    seed: int,
    count: int,
    states: tuple[int, int] = (3, 6),
    actions: tuple[int, int] = (2, 3),
    discounts: tuple[float, ...] = DISCOUNTS,
    deltas: tuple[float, ...] = DELTAS,
) -> Iterator[SepProblem]:
    """``count`` reproducible instances with sizes drawn from the inclusive ranges."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        S = int(rng.integers(states[0], states[1] + 1))
        A = int(rng.integers(actions[0], actions[1] + 1))
        delta = float(rng.choice(deltas))
        g_agent, g_human = (float(g) for g in rng.choice(discounts, size=2))
        yield random_problem(rng, S, A, delta, g_agent, g_human)
