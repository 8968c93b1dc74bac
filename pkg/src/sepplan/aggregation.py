"""State aggregation: search over policies that pick one action per cluster.

Cluster policies are always lifted to ground policies before anything is
evaluated, so the safety bound and the Pareto comparison stay exact on ground
states. Only candidate generation is approximate: a cluster's descent/ascent
test reads the ground Q-values of its lowest-id member.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

import numpy as np

from .archive import ParetoArchive, SearchStats
from .brute_force import _exhaustive
from .mdp import Mdp, Policy, SepProblem
from .pag import _ascent_search
from .pdt import MAX_EVALUATIONS, _descent_search
from .safety import DEFAULT_EPS, ENUMERATION_CAP, optimal_reference, search_action_sets
from .space import SearchSpace


@dataclass(frozen=True)
class Aggregation:
    """Partition of the state set into clusters (cluster id -> member states)."""

    members: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(tuple(sorted(int(s) for s in m)) for m in self.members))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"c{k}" for k in range(len(self.members))))
        if len(self.labels) != len(self.members):
            raise ValueError("need one label per cluster")
        if any(not m for m in self.members):
            raise ValueError("empty cluster")
        flat = [s for m in self.members for s in m]
        if len(flat) != len(set(flat)):
            raise ValueError("clusters overlap")
        if sorted(flat) != list(range(len(flat))):
            raise ValueError("clusters do not cover states 0..n-1")

    @property
    def n_clusters(self) -> int:
        return len(self.members)

    @property
    def n_states(self) -> int:
        return sum(len(m) for m in self.members)

    @classmethod
    def singletons(cls, n_states: int) -> "Aggregation":
        return cls(tuple((s,) for s in range(n_states)), tuple(f"s{s}" for s in range(n_states)))

    @classmethod
    def from_assignment(cls, assignment: Sequence[Sequence] | Sequence, labels: Sequence[str] | None = None):
        """Build from a per-state cluster key; clusters are ordered by first appearance."""
        order: dict = {}
        for s, key in enumerate(assignment):
            order.setdefault(key, []).append(s)
        names = [str(k) for k in order] if labels is None else list(labels)
        return cls(tuple(tuple(v) for v in order.values()), tuple(names))

    def cluster_of(self) -> np.ndarray:
        out = np.empty(self.n_states, dtype=np.int64)
        for k, m in enumerate(self.members):
            out[list(m)] = k
        return out

    def validate_for(self, mdp: Mdp) -> None:
        """Check shared action sets and singleton terminals against ``mdp``."""
        if self.n_states != mdp.n_states:
            raise ValueError(f"aggregation covers {self.n_states} states, MDP has {mdp.n_states}")
        for k, m in enumerate(self.members):
            acts = {mdp.actions[s] for s in m}
            if len(acts) > 1:
                raise ValueError(f"cluster {k} mixes states with different action sets")
            if len(m) > 1 and any(s in mdp.terminals for s in m):
                raise ValueError(f"cluster {k} puts a terminal state with other states")

    def to_dict(self) -> dict:
        return {
            "n_clusters": self.n_clusters,
            "members": {str(k): list(m) for k, m in enumerate(self.members)},
            "labels": {str(k): lab for k, lab in enumerate(self.labels)},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Aggregation":
        n = int(d["n_clusters"])
        members = tuple(tuple(d["members"][str(k)]) for k in range(n))
        labels_raw = d.get("labels", {})
        labels = tuple(labels_raw.get(str(k), f"c{k}") for k in range(n))
        return cls(members, labels)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


@dataclass(frozen=True)
class ClusterPolicy:
    choice: tuple[int, ...]


def lift(cp: ClusterPolicy | Sequence[int], agg: Aggregation, mdp: Mdp | None = None) -> Policy:
    """Ground policy taking each state's action from its cluster."""
    choice = tuple(cp.choice) if isinstance(cp, ClusterPolicy) else tuple(cp)
    if len(choice) != agg.n_clusters:
        raise ValueError(f"cluster policy has {len(choice)} entries, aggregation has {agg.n_clusters} clusters")
    ground = np.asarray(choice, dtype=np.int64)[agg.cluster_of()]
    if mdp is not None:
        for k, m in enumerate(agg.members):
            if choice[k] not in mdp.actions[m[0]]:
                raise ValueError(f"action {choice[k]} invalid for the members of cluster {k}")
    return Policy(tuple(ground))


def cluster_action_sets(problem: SepProblem, agg: Aggregation, use_pruning: bool, eps: float = DEFAULT_EPS):
    """Per-cluster allowed actions: intersection of member sets (union if empty)."""
    ground = search_action_sets(problem, use_pruning, eps)
    out = []
    for k, m in enumerate(agg.members):
        common = set(ground[m[0]]).intersection(*(ground[s] for s in m[1:]))
        if not common:
            warnings.warn(
                f"cluster {k} ({agg.labels[k]}): pruned action sets of its members are disjoint; using their union",
                stacklevel=2,
            )
            common = set().union(*(ground[s] for s in m))
        out.append(tuple(sorted(common)))
    return tuple(out)


def aggregated_search(
    problem: SepProblem,
    agg: Aggregation,
    algo: Literal["pdt", "pag"] = "pdt",
    use_pruning: bool = True,
    eps: float = DEFAULT_EPS,
    max_evaluations: int = MAX_EVALUATIONS,
    max_sweeps: int = 10_000,
) -> tuple[ParetoArchive, SearchStats] | tuple[Policy, SearchStats]:
    """Run PDT or PAG with one decision per cluster.

    The root takes each cluster's action from the optimal agent policy at the
    cluster's lowest-id member. PDT returns an archive of lifted ground policies
    (each entry also records its cluster policy); PAG returns a ground policy.
    """
    agg.validate_for(problem.agent_model)
    _, pi_star = optimal_reference(problem)
    sets = cluster_action_sets(problem, agg, use_pruning, eps)
    space = SearchSpace.from_members(agg.members, sets, problem.n_states)
    root = space.root_from(pi_star.choice)
    if algo == "pdt":
        return _descent_search(problem, space, root, eps, max_evaluations, clustered=True)
    if algo == "pag":
        key, stats = _ascent_search(problem, space, root, eps, max_sweeps)
        stats.extra["cluster_policy"] = key
        return Policy(space.lift(key)), stats
    raise ValueError(f"unknown algorithm {algo!r}")


def aggregated_brute_force(
    problem: SepProblem,
    agg: Aggregation,
    use_pruning: bool = False,
    eps: float = DEFAULT_EPS,
    cap: int = ENUMERATION_CAP,
) -> tuple[ParetoArchive, SearchStats]:
    """Pareto set of the cluster-conditioned policies, by full enumeration."""
    agg.validate_for(problem.agent_model)
    sets = cluster_action_sets(problem, agg, use_pruning, eps)
    space = SearchSpace.from_members(agg.members, sets, problem.n_states)
    return _exhaustive(problem, space, eps, cap, batch=4096, clustered=True)
