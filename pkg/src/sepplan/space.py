"""Search coordinates: the unit a single policy modification changes.

Exact search uses one coordinate per state. Aggregated search uses one per
cluster; a coordinate's action is applied to all of its member states and its
descent/ascent tests read the Q-values of a representative member.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class SearchSpace:
    members: tuple[tuple[int, ...], ...]
    allowed: tuple[tuple[int, ...], ...]
    state_to_coord: np.ndarray

    @classmethod
    def from_members(cls, members: Sequence[Sequence[int]], allowed: Sequence[Sequence[int]], n_states: int):
        s2c = np.full(n_states, -1, dtype=np.int64)
        for k, ms in enumerate(members):
            s2c[list(ms)] = k
        if (s2c < 0).any():
            raise ValueError("coordinates do not cover every state")
        return cls(tuple(tuple(sorted(m)) for m in members), tuple(tuple(a) for a in allowed), s2c)

    @classmethod
    def ground(cls, allowed: Sequence[Sequence[int]]) -> "SearchSpace":
        n = len(allowed)
        return cls.from_members([(s,) for s in range(n)], allowed, n)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def representatives(self) -> tuple[int, ...]:
        return tuple(m[0] for m in self.members)

    def lift(self, key: Sequence[int]) -> np.ndarray:
        return np.asarray(key, dtype=np.int64)[self.state_to_coord]

    def root_from(self, ground_policy: Sequence[int]) -> tuple[int, ...]:
        """Coordinate key taking each representative's action from ``ground_policy``."""
        return tuple(int(ground_policy[r]) for r in self.representatives)
