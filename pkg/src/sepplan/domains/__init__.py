"""Replica benchmark domains, their default aggregations, scoring and rendering."""

from __future__ import annotations

from ..aggregation import Aggregation
from ..mdp import Policy, SepProblem, Trajectory, simulate
from ..safety import optimal_reference
from .cliff import CliffSpec, large_cliff, linear_slip, make_cliff, small_cliff
from .grid import ARROWS, MOVES, manhattan
from .wumpus import WumpusSpec, decode, default_wumpus, make_wumpus

__all__ = [
    "CliffSpec",
    "WumpusSpec",
    "default_aggregation",
    "default_wumpus",
    "domain_problem",
    "large_cliff",
    "linear_slip",
    "make_cliff",
    "make_wumpus",
    "mean_gap",
    "most_likely",
    "render",
    "score_policy",
    "small_cliff",
    "turn_count",
]


def domain_problem(name: str, delta: float = 1.0) -> SepProblem:
    """Preset by short name: ``cs``, ``cl`` or ``wumpus`` (alias ``w``)."""
    key = name.lower()
    if key == "cs":
        return make_cliff(small_cliff(), delta)
    if key == "cl":
        return make_cliff(large_cliff(), delta)
    if key in ("wumpus", "w"):
        return make_wumpus(default_wumpus(), delta)
    raise ValueError(f"unknown domain {name!r} (expected cs, cl or wumpus)")


def _wumpus_direction(agent, wumpus) -> str:
    dr, dc = wumpus[0] - agent[0], wumpus[1] - agent[1]
    if abs(dr) >= abs(dc):
        return "N" if dr < 0 else "S"
    return "W" if dc < 0 else "E"


def default_aggregation(problem: SepProblem) -> Aggregation:
    """Handcrafted partition for a generated cliff or wumpus problem.

    Cliff worlds: the start cell, then each of the upper rows split into its
    left end, middle and right end. Wumpus world: the wumpus's compass
    direction from the agent, split by the optimal agent action so that the
    lifted optimal policy is a cluster policy. Terminals stay singletons.
    """
    meta = problem.meta
    domain = meta.get("domain")
    terminals = problem.agent_model.terminals
    keys: list = []
    if domain == "cliff":
        width = meta["width"]
        for s, (r, c) in enumerate(meta["cells"]):
            if s in terminals:
                keys.append(("terminal", s))
            elif s == meta["start"]:
                keys.append(("start",))
            else:
                seg = "left" if c == 0 else "right" if c == width - 1 else "middle"
                keys.append((f"row{r}", seg))
    elif domain == "wumpus":
        _, pi_star = optimal_reference(problem)
        for s in range(problem.n_states):
            cfg = decode(problem, s)
            if isinstance(cfg, str):
                keys.append(("terminal", cfg))
            else:
                keys.append((MOVES[pi_star[s]], "wumpus " + _wumpus_direction(cfg[0], cfg[1])))
    else:
        raise ValueError("problem carries no known domain metadata")
    labels = {}
    for k in keys:
        labels.setdefault(k, "/".join(str(x) for x in k))
    return Aggregation.from_assignment(keys, list(labels.values()))


def most_likely(problem: SepProblem, policy: Policy, start: int | None = None, max_steps: int = 1000) -> Trajectory:
    """Most-likely rollout in the agent model from the domain's start state."""
    s0 = problem.meta["start"] if start is None else start
    return simulate(problem.agent_model, policy, s0, max_steps=max_steps, mode="most_likely")


def turn_count(cells) -> int:
    """Direction changes along a cell path; stationary steps are skipped."""
    moves = [(b[0] - a[0], b[1] - a[1]) for a, b in zip(cells, cells[1:]) if a != b]
    return sum(1 for m1, m2 in zip(moves, moves[1:]) if m1 != m2)


def mean_gap(gaps) -> float:
    gaps = list(gaps)
    if not gaps:
        return 0.0
    return sum(gaps) / len(gaps)


def _cliff_cells(problem: SepProblem, traj: Trajectory) -> list[tuple[int, int]]:
    cells = problem.meta["cells"]
    path = [tuple(cells[s]) for s in traj.states]
    if traj.steps:
        path.append(tuple(cells[traj.steps[-1].next_state]))
    return path


def score_policy(problem: SepProblem, policy: Policy) -> float:
    """Selection score of a policy from its most-likely trajectory (higher is better).

    Cliff worlds: minus the number of turns. Wumpus world: mean Manhattan
    distance between agent and wumpus over the visited non-terminal states.
    """
    traj = most_likely(problem, policy)
    domain = problem.meta.get("domain")
    if domain == "cliff":
        return -float(turn_count(_cliff_cells(problem, traj)))
    if domain == "wumpus":
        gaps = []
        for s in traj.states:
            cfg = decode(problem, s)
            if not isinstance(cfg, str):
                gaps.append(manhattan(cfg[0], cfg[1]))
        return mean_gap(gaps)
    raise ValueError("problem carries no known domain metadata")


def render(problem: SepProblem, policy: Policy) -> str:
    """ASCII picture of the most-likely trajectory of ``policy``."""
    meta = problem.meta
    traj = most_likely(problem, policy)
    h, w = meta["height"], meta["width"]
    grid = [["." for _ in range(w)] for _ in range(h)]
    if meta.get("domain") == "cliff":
        for s in meta["cliff"]:
            r, c = meta["cells"][s]
            grid[r][c] = "#"
        gr, gc = meta["cells"][meta["goal"]]
        grid[gr][gc] = "G"
        for st in traj.steps:
            r, c = meta["cells"][st.state]
            grid[r][c] = ARROWS[st.action]
        sr, sc = meta["cells"][meta["start"]]
        grid[sr][sc] = "S"
        footer = f"turns: {turn_count(_cliff_cells(problem, traj))}"
    else:
        er, ec = meta["exit_cell"]
        grid[er][ec] = "E"
        for r, c in meta["coins"]:
            grid[r][c] = "$"
        wumpus_path = []
        for st in traj.steps:
            cfg = decode(problem, st.state)
            r, c = cfg[0]
            if grid[r][c] == ".":
                grid[r][c] = ARROWS[st.action]
            wumpus_path.append(tuple(cfg[1]))
        first = decode(problem, meta["start"])
        grid[first[0][0]][first[0][1]] = "S"
        grid[first[1][0]][first[1][1]] = "W"
        outcome = decode(problem, traj.steps[-1].next_state) if traj.steps else "start"
        footer = f"wumpus: {' '.join(f'{r}{c}' for r, c in wumpus_path)}\noutcome: {outcome}"
    body = "\n".join(" ".join(row) for row in grid)
    return f"{body}\nreturn: {traj.discounted_return:.4f}\n{footer}"
