"""JSON serialization for MDPs, problems, aggregations and solver results.

MDP files use sparse maps keyed by comma-joined ids::

    {"n_states": 3, "actions": [[0, 1], ...],
     "transitions": {"0,1": [[2, 0.5], [1, "0.5"]], ...},
     "rewards": {"0,1,2": 10.0}, "discount": 0.9, "terminals": [2]}

Probabilities may be numbers or decimal strings. A transition row whose sum is
off by less than ``RENORMALIZE_TOL`` is rescaled to sum to one; anything worse
is rejected.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .aggregation import Aggregation
from .archive import ParetoArchive
from .mdp import PROB_TOL, InvalidMdpError, Mdp, Policy, SepProblem

RENORMALIZE_TOL = 1e-6


class MalformedFileError(ValueError):
    """A JSON document does not follow the expected schema."""


def mdp_to_dict(mdp: Mdp) -> dict:
    A = mdp.n_actions
    T = mdp.transitions.tocoo()
    R = mdp.rewards.tocoo()
    transitions: dict[str, list] = {}
    for row, s2, p in sorted(zip(T.row.tolist(), T.col.tolist(), T.data.tolist())):
        s, a = divmod(row, A)
        transitions.setdefault(f"{s},{a}", []).append([s2, p])
    rewards = {}
    for row, s2, r in sorted(zip(R.row.tolist(), R.col.tolist(), R.data.tolist())):
        if r != 0.0:
            s, a = divmod(row, A)
            rewards[f"{s},{a},{s2}"] = r
    return {
        "n_states": mdp.n_states,
        "actions": [list(a) for a in mdp.actions],
        "transitions": transitions,
        "rewards": rewards,
        "discount": mdp.discount,
        "terminals": sorted(mdp.terminals),
    }


def _ids(key: str, n: int) -> tuple[int, ...]:
    try:
        parts = tuple(int(x) for x in key.split(","))
    except ValueError:
        raise MalformedFileError(f"bad key {key!r}") from None
    if len(parts) != n:
        raise MalformedFileError(f"key {key!r} should hold {n} comma-separated ids")
    return parts


def mdp_from_dict(d: Mapping[str, Any]) -> Mdp:
    try:
        n = int(d["n_states"])
        actions = [tuple(int(a) for a in acts) for acts in d["actions"]]
        discount = float(d["discount"])
        raw_t = d["transitions"]
        raw_r = d.get("rewards", {})
        terminals = [int(t) for t in d.get("terminals", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFileError(f"MDP document is missing or mistypes a field: {exc}") from None
    transitions = {}
    for key, succ in raw_t.items():
        s, a = _ids(key, 2)
        try:
            pairs = [(int(s2), float(p)) for s2, p in succ]
        except (TypeError, ValueError):
            raise MalformedFileError(f"transition row {key!r} is not a list of [state, probability]") from None
        total = sum(p for _, p in pairs)
        if abs(total - 1.0) >= RENORMALIZE_TOL:
            raise InvalidMdpError(f"transition row {key!r} sums to {total!r}")
        if abs(total - 1.0) > PROB_TOL:
            pairs = [(s2, p / total) for s2, p in pairs]
        # rows already summing to 1 within rounding are kept verbatim so that
        # a save/load round trip reproduces the model bit for bit
        transitions[(s, a)] = pairs
    rewards = {_ids(key, 3): float(r) for key, r in raw_r.items()}
    return Mdp.from_sparse(n, actions, transitions, rewards, discount, terminals)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def problem_to_dict(problem: SepProblem) -> dict:
    return {
        "agent_model": mdp_to_dict(problem.agent_model),
        "human_model": mdp_to_dict(problem.human_model),
        "delta": problem.delta,
        "meta": _jsonable(dict(problem.meta)),
    }


def problem_from_dict(d: Mapping[str, Any], delta: float | None = None) -> SepProblem:
    try:
        agent, human = d["agent_model"], d["human_model"]
    except KeyError as exc:
        raise MalformedFileError(f"problem document lacks {exc}") from None
    d_val = d.get("delta", 1.0) if delta is None else delta
    return SepProblem(mdp_from_dict(agent), mdp_from_dict(human), float(d_val), d.get("meta", {}))


def dump(obj: Any, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def load_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedFileError(f"{path}: not valid JSON ({exc})") from None


def save_problem(problem: SepProblem, path: str | Path) -> None:
    dump(problem_to_dict(problem), path)


def load_problem(path: str | Path, delta: float | None = None) -> SepProblem:
    return problem_from_dict(load_json(path), delta)


def load_aggregation(path: str | Path) -> Aggregation:
    d = load_json(path)
    try:
        return Aggregation.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise MalformedFileError(f"{path}: bad aggregation document ({exc})") from None


def archive_to_list(archive: ParetoArchive) -> list[dict]:
    return [e.to_dict() for e in archive]


def policy_result(policy: Policy, v_human, v_agent) -> dict:
    return {
        "policy": list(policy.choice),
        "v_human": [float(x) for x in v_human],
        "v_agent": [float(x) for x in v_agent],
    }


def load_result_policies(path: str | Path) -> list[Policy]:
    """Policies from a single-policy or archive result document."""
    doc = load_json(path)
    items = doc if isinstance(doc, list) else [doc]
    out = []
    for item in items:
        if not isinstance(item, dict) or "policy" not in item:
            raise MalformedFileError(f"{path}: every result entry needs a 'policy' list")
        try:
            out.append(Policy(tuple(int(a) for a in item["policy"])))
        except (TypeError, ValueError):
            raise MalformedFileError(f"{path}: policy entries must be integer lists") from None
    return out
