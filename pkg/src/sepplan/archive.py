"""Pareto archive and search statistics shared by every solver."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .mdp import Policy, strictly_dominates


@dataclass(frozen=True, eq=False)
class ArchiveEntry:
    policy: Policy
    v_human: np.ndarray
    v_agent: np.ndarray
    cluster_policy: Policy | None = None

    def to_dict(self) -> dict:
        d = {
            "policy": list(self.policy.choice),
            "v_human": [float(x) for x in self.v_human],
            "v_agent": [float(x) for x in self.v_agent],
        }
        if self.cluster_policy is not None:
            d["cluster_policy"] = list(self.cluster_policy.choice)
        return d


class ParetoArchive:
    """Mutually non-dominated (under human-model values) set of feasible policies.

    Entries whose value vectors tie are all kept; only strictly dominated ones
    are dropped. Insertion order is preserved for reproducible exports.
    """

    def __init__(self, eps: float = 1e-9):
        self.eps = eps
        self._entries: list[ArchiveEntry] = []
        self._values = np.zeros((0, 0))

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[ArchiveEntry]:
        return iter(self._entries)

    def __getitem__(self, i: int) -> ArchiveEntry:
        return self._entries[i]

    @property
    def entries(self) -> list[ArchiveEntry]:
        return list(self._entries)

    @property
    def policies(self) -> list[Policy]:
        return [e.policy for e in self._entries]

    def dominated(self, v_human: np.ndarray) -> bool:
        """True if some entry strictly dominates ``v_human``."""
        if not self._entries:
            return False
        V = self._values
        return bool(np.any(np.all(V >= v_human - self.eps, axis=1) & np.any(V > v_human + self.eps, axis=1)))

    def add(self, policy: Policy, v_human: np.ndarray, v_agent: np.ndarray,
            cluster_policy: Policy | None = None) -> bool:
        """Insert unless dominated; evict entries the newcomer dominates."""
        v_human = np.asarray(v_human, dtype=float)
        if self.dominated(v_human):
            return False
        if self._entries:
            V = self._values
            beaten = np.all(v_human >= V - self.eps, axis=1) & np.any(v_human > V + self.eps, axis=1)
            if beaten.any():
                self._entries = [e for e, b in zip(self._entries, beaten) if not b]
                V = V[~beaten]
            self._values = np.vstack([V, v_human])
        else:
            self._values = v_human[None, :].copy()
        self._entries.append(ArchiveEntry(policy, v_human, np.asarray(v_agent, dtype=float), cluster_policy))
        return True

    def value_set(self, decimals: int = 6) -> set[tuple[float, ...]]:
        """Human value vectors rounded for set comparison."""
        return {tuple(np.round(e.v_human, decimals) + 0.0) for e in self._entries}

    def to_json(self) -> str:
        return json.dumps([e.to_dict() for e in self._entries], indent=1)

    def check_invariants(self) -> None:
        for i, a in enumerate(self._entries):
            for j, b in enumerate(self._entries):
                if i != j and strictly_dominates(a.v_human, b.v_human, self.eps):
                    raise AssertionError(f"archive entry {i} dominates entry {j}")


STATS_COLUMNS = ("domain", "delta", "algo", "evaluated", "expanded", "wall_time_s")


@dataclass
class SearchStats:
    policies_expanded: int = 0
    policies_evaluated: int = 0
    wall_time: float = 0.0
    pruned_by_bound: int = 0
    pruned_by_visited: int = 0
    converged: bool = True
    extra: dict = field(default_factory=dict)

    def csv_row(self, domain: str, delta: float, algo: str) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow(
            [domain, delta, algo, self.policies_evaluated, self.policies_expanded, f"{self.wall_time:.6f}"]
        )
        return buf.getvalue()
