"""Cliff worlds: walk from the start to the goal along a cliff.

The bottom row holds the start (left end), the goal (right end) and the cliff
cells in between. State ids are row-major cell indices. Every move costs
``step_reward``; entering the goal adds ``goal_reward`` and falling into the
cliff adds ``cliff_penalty``. Goal and cliff cells are absorbing.

In both models a move can "slip": with a per-row probability the agent moves
down (towards the cliff) instead of where it meant to go. The agent's true
model never slips; the human's model slips more the closer the row is to the
cliff.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..mdp import Mdp, SepProblem
from .grid import DOWN, MOVES, step

Cell = tuple[int, int]


@dataclass(frozen=True)
class CliffSpec:
    width: int = 5
    height: int = 4
    start: Cell | None = None
    goal: Cell | None = None
    cliff_cells: frozenset[Cell] | None = None
    agent_slip: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0)
    human_slip: tuple[float, ...] = (0.0, 0.0475, 0.095, 0.0)
    step_reward: float = -1.0
    goal_reward: float = 100.0
    cliff_penalty: float = -100.0
    agent_discount: float = 0.998
    human_discount: float = 0.998
    name: str = "cliff"
    delta: float = 1.0

    def __post_init__(self) -> None:
        h, w = self.height, self.width
        if h < 2 or w < 3:
            raise ValueError("a cliff world needs at least 2 rows and 3 columns")
        if self.start is None:
            object.__setattr__(self, "start", (h - 1, 0))
        if self.goal is None:
            object.__setattr__(self, "goal", (h - 1, w - 1))
        if self.cliff_cells is None:
            object.__setattr__(self, "cliff_cells", frozenset((h - 1, c) for c in range(1, w - 1)))
        object.__setattr__(self, "cliff_cells", frozenset(tuple(c) for c in self.cliff_cells))
        object.__setattr__(self, "agent_slip", tuple(float(p) for p in self.agent_slip))
        object.__setattr__(self, "human_slip", tuple(float(p) for p in self.human_slip))
        cells = [self.start, self.goal, *self.cliff_cells]
        for r, c in cells:
            if not (0 <= r < h and 0 <= c < w):
                raise ValueError(f"cell {(r, c)} lies outside the {h}x{w} grid")
        if self.goal in self.cliff_cells:
            raise ValueError("goal overlaps the cliff")
        if self.start in self.cliff_cells or self.start == self.goal:
            raise ValueError("start overlaps the goal or the cliff")
        for name in ("agent_slip", "human_slip"):
            probs = getattr(self, name)
            if len(probs) != h or any(not 0.0 <= p < 1.0 for p in probs):
                raise ValueError(f"{name} needs one probability in [0, 1) per row")

    def state_id(self, cell: Cell) -> int:
        return cell[0] * self.width + cell[1]

    def cell(self, s: int) -> Cell:
        return divmod(s, self.width)


def linear_slip(edge: float, height: int = 4) -> tuple[float, ...]:
    """Slip profile falling linearly from ``edge`` next to the cliff to 0 in the top row.

    The bottom row (start and goal) never slips.
    """
    rows = height - 1
    if rows == 1:
        return (edge, 0.0)
    return tuple(edge * r / (rows - 1) for r in range(rows)) + (0.0,)


def small_cliff(**overrides) -> CliffSpec:
    """4x5 replica (16 non-terminal cells)."""
    return CliffSpec(**{"name": "CS", **overrides})


def large_cliff(**overrides) -> CliffSpec:
    """4x100 replica (301 non-terminal cells).

    The goal reward is set so the shortest path returns the same undiscounted
    total as in the small world.
    """
    return CliffSpec(**{"width": 100, "goal_reward": 195.0, "name": "CL", **overrides})


def _model(spec: CliffSpec, slip: tuple[float, ...], discount: float) -> Mdp:
    h, w = spec.height, spec.width
    goal = spec.state_id(spec.goal)
    cliff = {spec.state_id(c) for c in spec.cliff_cells}
    terminals = cliff | {goal}
    n = h * w
    transitions: dict = {}
    rewards: dict = {}
    for s in range(n):
        for a in range(len(MOVES)):
            if s in terminals:
                transitions[(s, a)] = [(s, 1.0)]
                continue
            cell = spec.cell(s)
            p = slip[cell[0]] if a != DOWN else 0.0
            outcomes = [(spec.state_id(step(cell, a, h, w)), 1.0 - p)]
            if p > 0.0:
                outcomes.append((spec.state_id(step(cell, DOWN, h, w)), p))
            transitions[(s, a)] = outcomes
            for s2, _ in outcomes:
                bonus = spec.goal_reward if s2 == goal else spec.cliff_penalty if s2 in cliff else 0.0
                rewards[(s, a, s2)] = spec.step_reward + bonus
    actions = [tuple(range(len(MOVES)))] * n
    return Mdp.from_sparse(n, actions, transitions, rewards, discount, terminals)


def cliff_meta(spec: CliffSpec) -> dict:
    return {
        "domain": "cliff",
        "name": spec.name,
        "height": spec.height,
        "width": spec.width,
        "start": spec.state_id(spec.start),
        "goal": spec.state_id(spec.goal),
        "cliff": sorted(spec.state_id(c) for c in spec.cliff_cells),
        "cells": [list(spec.cell(s)) for s in range(spec.height * spec.width)],
        "actions": list(MOVES),
        "spec": {
            "agent_slip": list(spec.agent_slip),
            "human_slip": list(spec.human_slip),
            "step_reward": spec.step_reward,
            "goal_reward": spec.goal_reward,
            "cliff_penalty": spec.cliff_penalty,
            "agent_discount": spec.agent_discount,
            "human_discount": spec.human_discount,
        },
    }


def make_cliff(spec: CliffSpec, delta: float | None = None) -> SepProblem:
    agent = _model(spec, spec.agent_slip, spec.agent_discount)
    human = _model(spec, spec.human_slip, spec.human_discount)
    return SepProblem(agent, human, spec.delta if delta is None else delta, cliff_meta(spec))
