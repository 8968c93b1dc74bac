"""Wumpus world: collect coins and leave the cave before the wumpus catches you.

A state is (agent cell, wumpus cell, coin flags). Each turn the agent moves
first; stepping onto the exit ends the episode (+exit reward), stepping onto
the wumpus ends it (encounter penalty) and stepping onto an uncollected coin
collects it (+coin reward). Then the wumpus takes one step that reduces its
Manhattan distance to the agent (closing the row gap first), or, with
probability ``wumpus_noise``, a uniformly random step. The wumpus never enters
the exit cell; blocked steps leave it in place. Reaching the agent's cell is an
encounter.

With probability ``agent_noise`` the agent's move veers to one of the two
perpendicular directions instead (half each).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product

from ..mdp import Mdp, SepProblem
from .grid import DOWN, LEFT, MOVES, RIGHT, UP, manhattan, step

Cell = tuple[int, int]

_PERPENDICULAR = {UP: (LEFT, RIGHT), DOWN: (LEFT, RIGHT), LEFT: (UP, DOWN), RIGHT: (UP, DOWN)}


@dataclass(frozen=True)
class WumpusSpec:
    size: int = 5
    agent_start: Cell = (4, 0)
    wumpus_start: Cell = (0, 0)
    exit: Cell = (0, 4)
    coins: tuple[Cell, ...] = ((2, 1), (3, 3))
    coin_reward: float = 30.0
    wumpus_penalty: float = -100.0
    exit_reward: float = 100.0
    step_reward: float = 0.0
    agent_noise_agent: float = 0.0
    wumpus_noise_agent: float = 0.2
    agent_noise_human: float = 0.2
    wumpus_noise_human: float = 0.2
    agent_discount: float = 0.99
    human_discount: float = 0.99
    name: str = "W"
    delta: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "coins", tuple(tuple(c) for c in self.coins))
        for name in ("agent_start", "wumpus_start", "exit"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        cells = [self.agent_start, self.wumpus_start, self.exit, *self.coins]
        for r, c in cells:
            if not (0 <= r < self.size and 0 <= c < self.size):
                raise ValueError(f"cell {(r, c)} lies outside the {self.size}x{self.size} cave")
        if self.agent_start == self.wumpus_start:
            raise ValueError("agent and wumpus start on the same cell")
        if self.exit in (self.agent_start, self.wumpus_start):
            raise ValueError("a start cell overlaps the exit")
        if self.exit in self.coins or len(set(self.coins)) != len(self.coins):
            raise ValueError("coins must be distinct and off the exit")
        for name in ("agent_noise_agent", "wumpus_noise_agent", "agent_noise_human", "wumpus_noise_human"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")


def default_wumpus(**overrides) -> WumpusSpec:
    return replace(WumpusSpec(), **overrides)


class _Layout:
    """Index of the consistent (agent, wumpus, flags) configurations."""

    def __init__(self, spec: WumpusSpec):
        n = spec.size
        cells = [(r, c) for r in range(n) for c in range(n) if (r, c) != spec.exit]
        self.configs: list[tuple[Cell, Cell, tuple[bool, ...]]] = []
        for agent, wumpus in product(cells, cells):
            if agent == wumpus:
                continue
            for flags in product((False, True), repeat=len(spec.coins)):
                # standing on a coin means it has been picked up
                if any(agent == coin and not got for coin, got in zip(spec.coins, flags)):
                    continue
                self.configs.append((agent, wumpus, flags))
        self.index = {cfg: i for i, cfg in enumerate(self.configs)}
        self.encounter = len(self.configs)
        self.exit = self.encounter + 1
        self.n_states = self.exit + 1


def _wumpus_moves(spec: WumpusSpec, wumpus: Cell, agent: Cell, noise: float) -> dict[Cell, float]:
    n = spec.size

    def go(a: int) -> Cell:
        nxt = step(wumpus, a, n, n)
        return wumpus if nxt == spec.exit else nxt

    dr, dc = agent[0] - wumpus[0], agent[1] - wumpus[1]
    preferred = []
    if dr:
        preferred.append(DOWN if dr > 0 else UP)
    if dc:
        preferred.append(RIGHT if dc > 0 else LEFT)
    chase = wumpus
    for a in preferred:
        if go(a) != wumpus:
            chase = go(a)
            break
    out: dict[Cell, float] = {}
    out[chase] = out.get(chase, 0.0) + 1.0 - noise
    for a in range(4):
        cell = go(a)
        out[cell] = out.get(cell, 0.0) + noise / 4
    return {c: p for c, p in out.items() if p > 0.0}


def _agent_moves(spec: WumpusSpec, agent: Cell, action: int, noise: float) -> dict[Cell, float]:
    n = spec.size
    out: dict[Cell, float] = {}
    for a, p in [(action, 1.0 - noise)] + [(b, noise / 2) for b in _PERPENDICULAR[action]]:
        if p > 0.0:
            cell = step(agent, a, n, n)
            out[cell] = out.get(cell, 0.0) + p
    return out


def _model(spec: WumpusSpec, layout: _Layout, agent_noise: float, wumpus_noise: float, discount: float) -> Mdp:
    transitions: dict = {}
    rewards: dict = {}
    for s, (agent, wumpus, flags) in enumerate(layout.configs):
        for a in range(len(MOVES)):
            outcome: dict[int, float] = {}
            reward: dict[int, float] = {}

            def add(s2: int, p: float, r: float) -> None:
                # expected reward per successor, so merged outcomes keep the right mean
                prev = outcome.get(s2, 0.0)
                reward[s2] = (reward.get(s2, 0.0) * prev + r * p) / (prev + p)
                outcome[s2] = prev + p

            for cell, p in _agent_moves(spec, agent, a, agent_noise).items():
                r = spec.step_reward
                if cell == spec.exit:
                    add(layout.exit, p, r + spec.exit_reward)
                    continue
                if cell == wumpus:
                    add(layout.encounter, p, r + spec.wumpus_penalty)
                    continue
                new_flags = list(flags)
                for k, coin in enumerate(spec.coins):
                    if cell == coin and not flags[k]:
                        new_flags[k] = True
                        r += spec.coin_reward
                for w2, q in _wumpus_moves(spec, wumpus, cell, wumpus_noise).items():
                    if w2 == cell:
                        add(layout.encounter, p * q, r + spec.wumpus_penalty)
                    else:
                        add(layout.index[(cell, w2, tuple(new_flags))], p * q, r)
            transitions[(s, a)] = list(outcome.items())
            for s2, r in reward.items():
                rewards[(s, a, s2)] = r
    for t in (layout.encounter, layout.exit):
        for a in range(len(MOVES)):
            transitions[(t, a)] = [(t, 1.0)]
    actions = [tuple(range(len(MOVES)))] * layout.n_states
    return Mdp.from_sparse(layout.n_states, actions, transitions, rewards, discount, (layout.encounter, layout.exit))


def wumpus_meta(spec: WumpusSpec, layout: _Layout) -> dict:
    start = layout.index[(spec.agent_start, spec.wumpus_start, (False,) * len(spec.coins))]
    return {
        "domain": "wumpus",
        "name": spec.name,
        "height": spec.size,
        "width": spec.size,
        "start": start,
        "exit_cell": list(spec.exit),
        "coins": [list(c) for c in spec.coins],
        "encounter_state": layout.encounter,
        "exit_state": layout.exit,
        "states": [[list(a), list(w), [int(f) for f in flags]] for a, w, flags in layout.configs],
        "actions": list(MOVES),
    }


def make_wumpus(spec: WumpusSpec, delta: float | None = None) -> SepProblem:
    layout = _Layout(spec)
    agent = _model(spec, layout, spec.agent_noise_agent, spec.wumpus_noise_agent, spec.agent_discount)
    human = _model(spec, layout, spec.agent_noise_human, spec.wumpus_noise_human, spec.human_discount)
    return SepProblem(agent, human, spec.delta if delta is None else delta, wumpus_meta(spec, layout))


def decode(problem: SepProblem, s: int) -> tuple[Cell, Cell, tuple[bool, ...]] | str:
    """Configuration of state ``s``; terminals decode to ``"encounter"`` / ``"exit"``."""
    meta = problem.meta
    if s == meta["encounter_state"]:
        return "encounter"
    if s == meta["exit_state"]:
        return "exit"
    a, w, flags = meta["states"][s]
    return tuple(a), tuple(w), tuple(bool(f) for f in flags)


def manhattan_gap(problem: SepProblem, s: int) -> int | None:
    cfg = decode(problem, s)
    return None if isinstance(cfg, str) else manhattan(cfg[0], cfg[1])
