"""Tabular MDPs and the dynamic-programming primitives the planners are built on.

An :class:`Mdp` stores transitions and rewards as sparse ``(S*A, S)`` matrices,
row ``s * n_actions + a`` holding the successor distribution of ``(s, a)``.
Actions are integer ids; ``actions[s]`` lists the ids available in ``s``.
Terminal states are zero-reward absorbing states, so every quantity here is an
infinite-horizon discounted sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Literal, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

# Row-sum tolerance for stored models.
PROB_TOL = 1e-9
# Q-values closer than this are treated as tied (lowest action id wins).
TIE_TOL = 1e-9
# Above this many states, policy evaluation switches to a sparse LU solve.
DENSE_STATE_LIMIT = 200
# Batched dense solves are split so one chunk holds at most this many matrix entries.
BATCH_ENTRIES = 2**22


class InvalidMdpError(ValueError):
    """Raised when a model violates a structural invariant."""


@dataclass(frozen=True)
class Policy:
    """Stationary deterministic policy: one action id per state (or cluster)."""

    choice: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "choice", tuple(int(a) for a in self.choice))

    def __len__(self) -> int:
        return len(self.choice)

    def __getitem__(self, s: int) -> int:
        return self.choice[s]

    def __iter__(self) -> Iterator[int]:
        return iter(self.choice)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.choice, dtype=np.int64)

    def modify(self, s: int, a: int) -> "Policy":
        """Copy of the policy with ``choice[s]`` replaced by ``a``."""
        c = list(self.choice)
        c[s] = a
        return Policy(tuple(c))


@dataclass(frozen=True)
class Step:
    state: int
    action: int
    reward: float
    next_state: int


@dataclass(frozen=True)
class Trajectory:
    steps: tuple[Step, ...]
    discounted_return: float

    @property
    def states(self) -> list[int]:
        """Visited states, including the final one."""
        if not self.steps:
            return []
        return [st.state for st in self.steps] + [self.steps[-1].next_state]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True, eq=False)
class Mdp:
    """Immutable tabular MDP ``<S, A, T, R, gamma>`` with absorbing terminals.

    Build instances with :meth:`from_arrays` or :meth:`from_sparse`; the raw
    constructor expects already-assembled CSR matrices.
    """

    actions: tuple[tuple[int, ...], ...]
    transitions: sp.csr_matrix
    rewards: sp.csr_matrix
    discount: float
    terminals: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(tuple(sorted(int(a) for a in acts)) for acts in self.actions))
        object.__setattr__(self, "terminals", frozenset(int(s) for s in self.terminals))
        object.__setattr__(self, "discount", float(self.discount))
        self._validate()

    # ------------------------------------------------------------------ build

    @classmethod
    def from_arrays(
        cls,
        transitions: np.ndarray,
        rewards: np.ndarray,
        discount: float,
        terminals: Sequence[int] = (),
        actions: Sequence[Sequence[int]] | None = None,
    ) -> "Mdp":
        """Build from a dense ``(S, A, S)`` transition tensor.

        ``rewards`` may be ``(S, A, S)`` or ``(S, A)``; the latter is broadcast
        over successors. If ``actions`` is omitted every action is available
        everywhere. Rows of unavailable actions are ignored.
        """
        T = np.asarray(transitions, dtype=float)
        if T.ndim != 3 or T.shape[0] != T.shape[2]:
            raise InvalidMdpError(f"transitions must have shape (S, A, S), got {T.shape}")
        n_states, n_actions, _ = T.shape
        R = np.asarray(rewards, dtype=float)
        if R.shape == (n_states, n_actions):
            R = np.repeat(R[:, :, None], n_states, axis=2)
        if R.shape != T.shape:
            raise InvalidMdpError(f"rewards shape {R.shape} does not match transitions {T.shape}")
        if actions is None:
            actions = [tuple(range(n_actions))] * n_states
        mask = np.zeros((n_states, n_actions), dtype=bool)
        for s, acts in enumerate(actions):
            mask[s, list(acts)] = True
        T = T * mask[:, :, None]
        R = np.where(T > 0, R, 0.0)
        return cls(
            actions=tuple(tuple(a) for a in actions),
            transitions=sp.csr_matrix(T.reshape(n_states * n_actions, n_states)),
            rewards=sp.csr_matrix(R.reshape(n_states * n_actions, n_states)),
            discount=discount,
            terminals=frozenset(terminals),
        )

    @classmethod
    def from_sparse(
        cls,
        n_states: int,
        actions: Sequence[Sequence[int]],
        transitions: Mapping[tuple[int, int], Sequence[tuple[int, float]]],
        rewards: Mapping[tuple[int, int, int], float],
        discount: float,
        terminals: Sequence[int] = (),
    ) -> "Mdp":
        """Build from ``{(s, a): [(s', p), ...]}`` and ``{(s, a, s'): r}`` maps.

        Missing reward entries default to 0. Duplicate successors are summed.
        """
        if len(actions) != n_states:
            raise InvalidMdpError("need one action list per state")
        n_actions = 1 + max((a for acts in actions for a in acts), default=-1)
        t_rows, t_cols, t_vals = [], [], []
        for (s, a), succ in transitions.items():
            for s2, p in succ:
                t_rows.append(s * n_actions + a)
                t_cols.append(s2)
                t_vals.append(float(p))
        r_rows, r_cols, r_vals = [], [], []
        for (s, a, s2), r in rewards.items():
            if r != 0.0:
                r_rows.append(s * n_actions + a)
                r_cols.append(s2)
                r_vals.append(float(r))
        shape = (n_states * n_actions, n_states)
        T = sp.csr_matrix((t_vals, (t_rows, t_cols)), shape=shape)
        T.sum_duplicates()
        R = sp.csr_matrix((r_vals, (r_rows, r_cols)), shape=shape)
        R.sum_duplicates()
        return cls(actions=tuple(tuple(a) for a in actions), transitions=T, rewards=R,
                   discount=discount, terminals=frozenset(terminals))

    def _validate(self) -> None:
        S = len(self.actions)
        if S == 0:
            raise InvalidMdpError("MDP has no states")
        if not 0.0 < self.discount < 1.0:
            raise InvalidMdpError(f"discount must lie in (0, 1), got {self.discount}")
        for s, acts in enumerate(self.actions):
            if not acts:
                raise InvalidMdpError(f"state {s} has no actions")
            if len(set(acts)) != len(acts) or acts[0] < 0:
                raise InvalidMdpError(f"state {s} has invalid action ids {acts}")
        A = self.n_actions
        if self.transitions.shape != (S * A, S) or self.rewards.shape != (S * A, S):
            raise InvalidMdpError("transition/reward matrices have the wrong shape")
        if any(not 0 <= t < S for t in self.terminals):
            raise InvalidMdpError("terminal id out of range")
        T = self.transitions
        if T.nnz and T.data.min() < 0:
            raise InvalidMdpError("negative transition probability")
        if not np.all(np.isfinite(self.rewards.data)) or not np.all(np.isfinite(T.data)):
            raise InvalidMdpError("non-finite transition or reward entry")
        sums = np.asarray(T.sum(axis=1)).ravel().reshape(S, A)
        mask = self.action_mask
        bad = np.abs(sums[mask] - 1.0) > PROB_TOL
        if bad.any():
            s, a = np.argwhere(mask)[np.flatnonzero(bad)[0]]
            raise InvalidMdpError(f"transition row ({s}, {a}) sums to {sums[s, a]!r}")
        if np.any(sums[~mask] != 0.0):
            raise InvalidMdpError("unavailable action has transition mass")
        for t in self.terminals:
            for a in self.actions[t]:
                row = t * A + a
                if abs(T[row, t] - 1.0) > PROB_TOL or self.rewards[row].count_nonzero():
                    raise InvalidMdpError(f"terminal state {t} is not a zero-reward absorbing state")

    # ------------------------------------------------------------- derived

    @property
    def n_states(self) -> int:
        return len(self.actions)

    @cached_property
    def n_actions(self) -> int:
        return 1 + max(a for acts in self.actions for a in acts)

    @cached_property
    def action_mask(self) -> np.ndarray:
        mask = np.zeros((self.n_states, self.n_actions), dtype=bool)
        for s, acts in enumerate(self.actions):
            mask[s, list(acts)] = True
        mask.setflags(write=False)
        return mask

    @cached_property
    def expected_rewards(self) -> np.ndarray:
        """``R(s, a) = sum_s' T(s'|s,a) R(s,a,s')`` as an ``(S, A)`` array."""
        r = np.asarray(self.transitions.multiply(self.rewards).sum(axis=1)).ravel()
        r = r.reshape(self.n_states, self.n_actions)
        r.setflags(write=False)
        return r

    @cached_property
    def _dense_transitions(self) -> np.ndarray:
        T = self.transitions.toarray().reshape(self.n_states, self.n_actions, self.n_states)
        T.setflags(write=False)
        return T

    @cached_property
    def _identity(self) -> np.ndarray:
        eye = np.eye(self.n_states)
        eye.setflags(write=False)
        return eye

    @cached_property
    def _successors(self) -> dict[tuple[int, int], tuple[np.ndarray, np.ndarray, np.ndarray]]:
        T = self.transitions.sorted_indices()
        rows = np.repeat(np.arange(T.shape[0]), np.diff(T.indptr))
        rew = np.asarray(self.rewards[rows, T.indices]).ravel()
        out = {}
        A = self.n_actions
        for s, acts in enumerate(self.actions):
            for a in acts:
                lo, hi = T.indptr[s * A + a], T.indptr[s * A + a + 1]
                out[(s, a)] = (T.indices[lo:hi].copy(), T.data[lo:hi].copy(), rew[lo:hi].copy())
        return out

    def successors(self, s: int, a: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(next_states, probabilities, rewards)`` for ``(s, a)``, sorted by state id."""
        if a not in self.actions[s]:
            raise ValueError(f"action {a} not available in state {s}")
        return self._successors[(s, a)]

    def is_terminal(self, s: int) -> bool:
        return s in self.terminals


# ---------------------------------------------------------------- operations


def check_policy(mdp: Mdp, policy: Policy | Sequence[int]) -> np.ndarray:
    """Return the policy as an int array after checking it against ``mdp``."""
    pi = np.asarray(tuple(policy), dtype=np.int64)
    if pi.shape != (mdp.n_states,):
        raise ValueError(f"policy has length {pi.size}, MDP has {mdp.n_states} states")
    if np.any(pi < 0) or np.any(pi >= mdp.n_actions) or not mdp.action_mask[np.arange(mdp.n_states), pi].all():
        s = next(s for s in range(mdp.n_states) if pi[s] not in mdp.actions[s])
        raise ValueError(f"policy picks unavailable action {pi[s]} in state {s}")
    return pi


def q_values(mdp: Mdp, v: np.ndarray) -> np.ndarray:
    """All Q-values ``R(s,a) + gamma * E[v(s')]``; unavailable actions get ``-inf``."""
    q = mdp.expected_rewards + mdp.discount * (mdp.transitions @ np.asarray(v, dtype=float)).reshape(
        mdp.n_states, mdp.n_actions
    )
    return np.where(mdp.action_mask, q, -np.inf)


def q_value(mdp: Mdp, v: np.ndarray, s: int, a: int) -> float:
    """``sum_s' T(s'|s,a) [R(s,a,s') + gamma v(s')]`` for a single pair."""
    nxt, probs, rew = mdp.successors(s, a)
    return float(np.dot(probs, rew + mdp.discount * np.asarray(v, dtype=float)[nxt]))


def greedy_policy(mdp: Mdp, q: np.ndarray, tie_tol: float = TIE_TOL) -> Policy:
    """Greedy policy w.r.t. ``q``; among near-ties the lowest action id wins."""
    best = q.max(axis=1, keepdims=True)
    return Policy(tuple(np.argmax(q >= best - tie_tol, axis=1)))


def bellman_residual(mdp: Mdp, v: np.ndarray) -> float:
    return float(np.max(np.abs(q_values(mdp, v).max(axis=1) - v)))


def policy_evaluation(
    mdp: Mdp,
    policy: Policy | Sequence[int],
    mode: Literal["exact", "iterative"] = "exact",
    tolerance: float = 1e-10,
    max_iter: int = 10_000_000,
) -> np.ndarray:
    """Value of ``policy`` on ``mdp``.

    ``exact`` solves ``(I - gamma T_pi) V = R_pi``; ``iterative`` applies the
    policy Bellman operator until the sup-norm residual is at most ``tolerance``.
    """
    pi = check_policy(mdp, policy)
    return _evaluate(mdp, pi, mode, tolerance, max_iter)


def _evaluate(mdp: Mdp, pi: np.ndarray, mode: str = "exact", tolerance: float = 1e-10,
              max_iter: int = 10_000_000) -> np.ndarray:
    # Unchecked fast path used by the search loops.
    S, g = mdp.n_states, mdp.discount
    idx = np.arange(S)
    r_pi = mdp.expected_rewards[idx, pi]
    if mode == "exact":
        if S <= DENSE_STATE_LIMIT:
            # numpy's solver has far less per-call overhead than scipy's on small systems
            return np.linalg.solve(mdp._identity - g * mdp._dense_transitions[idx, pi], r_pi)
        P = mdp.transitions[idx * mdp.n_actions + pi]
        M = (sp.identity(S, format="csc") - g * P).tocsc()
        return spla.splu(M).solve(r_pi)
    if mode != "iterative":
        raise ValueError(f"unknown evaluation mode {mode!r}")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    P = mdp.transitions[idx * mdp.n_actions + pi]
    v = np.zeros(S)
    for _ in range(max_iter):
        nv = r_pi + g * (P @ v)
        if np.max(np.abs(nv - v)) <= tolerance:
            return nv
        v = nv
    raise RuntimeError("iterative policy evaluation did not converge")


def value_iteration(
    mdp: Mdp, tolerance: float = 1e-10, eval_every: int = 25, max_iter: int = 1_000_000
) -> tuple[np.ndarray, Policy]:
    """Optimal values and the greedy (lowest-id tie-break) optimal policy.

    Bellman backups are interleaved every ``eval_every`` sweeps with an exact
    evaluation of the current greedy policy; the loop stops once that exact
    value has Bellman residual ``<= tolerance``. The returned ``V`` is the exact
    value of the returned policy.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    v = np.zeros(mdp.n_states)
    for it in range(1, max_iter + 1):
        q = q_values(mdp, v)
        nv = q.max(axis=1)
        if np.max(np.abs(nv - v)) <= tolerance or it % eval_every == 0:
            pi = greedy_policy(mdp, q)
            v_pi = _evaluate(mdp, pi.array)
            if bellman_residual(mdp, v_pi) <= tolerance:
                return _finalize_greedy(mdp, v_pi, tolerance)
            nv = v_pi
        v = nv
    raise RuntimeError("value iteration did not converge")


def _finalize_greedy(mdp: Mdp, v: np.ndarray, tolerance: float) -> tuple[np.ndarray, Policy]:
    for _ in range(mdp.n_states + 1):
        pi = greedy_policy(mdp, q_values(mdp, v))
        nv = _evaluate(mdp, pi.array)
        if np.max(np.abs(nv - v)) <= TIE_TOL:
            return nv, pi
        v = nv
    if bellman_residual(mdp, v) > tolerance:
        raise RuntimeError("greedy tie-breaking destabilised the optimal value")
    return v, pi


def strictly_dominates(v1: np.ndarray, v2: np.ndarray, eps: float = 0.0) -> bool:
    """``v1 >= v2 - eps`` everywhere and ``v1 > v2 + eps`` somewhere."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if v1.shape != v2.shape:
        raise ValueError(f"value vectors differ in shape: {v1.shape} vs {v2.shape}")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    return bool(np.all(v1 >= v2 - eps) and np.any(v1 > v2 + eps))


def simulate(
    mdp: Mdp,
    policy: Policy | Sequence[int],
    start: int,
    rng_seed: int = 0,
    max_steps: int = 1000,
    mode: Literal["sample", "most_likely"] = "sample",
) -> Trajectory:
    """Roll out ``policy`` from ``start`` until a terminal state or ``max_steps``.

    ``most_likely`` follows the highest-probability successor (lowest id on ties)
    and ignores the seed.
    """
    pi = check_policy(mdp, policy)
    if not 0 <= start < mdp.n_states:
        raise ValueError(f"start state {start} out of range")
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    if mode not in ("sample", "most_likely"):
        raise ValueError(f"unknown simulation mode {mode!r}")
    rng = np.random.default_rng(rng_seed)
    steps: list[Step] = []
    ret, disc, s = 0.0, 1.0, int(start)
    for _ in range(max_steps):
        if s in mdp.terminals:
            break
        a = int(pi[s])
        nxt, probs, rew = mdp._successors[(s, a)]
        if mode == "most_likely":
            k = int(np.argmax(probs))
        else:
            k = min(int(np.searchsorted(np.cumsum(probs), rng.random(), side="right")), len(nxt) - 1)
        r = float(rew[k])
        steps.append(Step(s, a, r, int(nxt[k])))
        ret += disc * r
        disc *= mdp.discount
        s = int(nxt[k])
    return Trajectory(tuple(steps), ret)


def evaluate_many(mdp: Mdp, policies: np.ndarray) -> np.ndarray:
    """Exact values of a batch of policies, shape ``(B, S)``.

    Solves the ``B`` linear systems in one batched call when the state space is
    small; falls back to one sparse solve per policy otherwise.
    """
    pis = np.atleast_2d(np.asarray(policies, dtype=np.int64))
    S = mdp.n_states
    if S > DENSE_STATE_LIMIT or pis.shape[0] == 1:
        return np.stack([_evaluate(mdp, pi) for pi in pis])
    idx = np.arange(S)
    chunk = max(1, BATCH_ENTRIES // (S * S))
    out = np.empty(pis.shape, dtype=float)
    for lo in range(0, pis.shape[0], chunk):
        part = pis[lo:lo + chunk]
        P = mdp._dense_transitions[idx[None, :], part]
        r = mdp.expected_rewards[idx[None, :], part]
        out[lo:lo + chunk] = np.linalg.solve(mdp._identity[None] - mdp.discount * P, r[..., None])[..., 0]
    return out


@dataclass(frozen=True, eq=False)
class SepProblem:
    """A safe explicable planning instance: agent model, human model, bound.

    Both models share the state space and every per-state action set. ``meta``
    carries optional domain information (grid geometry, start state, ...).
    """

    agent_model: Mdp
    human_model: Mdp
    delta: float
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", float(self.delta))
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.agent_model.n_states != self.human_model.n_states:
            raise InvalidMdpError("agent and human models have different state counts")
        if self.agent_model.actions != self.human_model.actions:
            s = next(s for s, (a, b) in enumerate(zip(self.agent_model.actions, self.human_model.actions)) if a != b)
            raise InvalidMdpError(f"agent and human models disagree on the action set of state {s}")

    @property
    def n_states(self) -> int:
        return self.agent_model.n_states

    @property
    def actions(self) -> tuple[tuple[int, ...], ...]:
        return self.agent_model.actions

    def with_delta(self, delta: float) -> "SepProblem":
        return SepProblem(self.agent_model, self.human_model, delta, self.meta)
