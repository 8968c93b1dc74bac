"""Small model builders and comparison helpers shared by the test modules."""

from __future__ import annotations

import numpy as np

from sepplan import Mdp, SepProblem


def self_loop(reward: float, discount: float) -> Mdp:
    """One state, one action looping on itself."""
    return Mdp.from_sparse(1, [(0,)], {(0, 0): [(0, 1.0)]}, {(0, 0, 0): reward}, discount)


def chain(rewards, discount: float) -> Mdp:
    """Deterministic chain 0 -> 1 -> ... -> n with a terminal at the end."""
    n = len(rewards)
    transitions = {(s, 0): [(s + 1, 1.0)] for s in range(n)}
    transitions[(n, 0)] = [(n, 1.0)]
    rew = {(s, 0, s + 1): r for s, r in enumerate(rewards)}
    return Mdp.from_sparse(n + 1, [(0,)] * (n + 1), transitions, rew, discount, terminals=[n])


def two_choice(agent_rewards, human_rewards, discount: float = 0.5, delta: float = 0.5) -> SepProblem:
    """Two states, two actions each; action a moves to state a and pays reward[s][a]."""
    def model(rew):
        transitions = {(s, a): [(a, 1.0)] for s in range(2) for a in range(2)}
        rewards = {(s, a, a): rew[s][a] for s in range(2) for a in range(2)}
        return Mdp.from_sparse(2, [(0, 1)] * 2, transitions, rewards, discount)
    return SepProblem(model(agent_rewards), model(human_rewards), delta)


def same_value_sets(a, b, tol: float = 1e-6) -> bool:
    """Every vector in ``a`` has a partner in ``b`` within ``tol`` per component, and vice versa."""
    A = np.array([e.v_human for e in a])
    B = np.array([e.v_human for e in b])
    if len(A) == 0 or len(B) == 0:
        return len(A) == len(B)

    def covered(X, Y):
        return all(np.any(np.all(np.abs(Y - x) <= tol, axis=1)) for x in X)

    return covered(A, B) and covered(B, A)


# one "criterion N: PASS|FAIL ..." line per acceptance check, printed in the pytest summary
ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
