"""Opponent pool with ELO ratings maintained against the model in training.

At most ten checkpoints are kept. A new checkpoint enters at the current dev
rating and pushes out the worst-rated member once the pool is full. Opponents
are drawn with probability proportional to exp(-(dev - member) / 400), so
near-peers are preferred but weaker members still appear.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAX_POOL_SIZE = 10
ELO_K = 32.0

WIN, LOSS, DRAW = "win", "loss", "draw"
_SCORES = {WIN: 1.0, LOSS: 0.0, DRAW: 0.5}


@dataclass
class RatedCheckpoint:
    checkpoint_id: str
    rating: float
    games: int = 0
    admitted_at: int = 0


@dataclass
class EloPool:
    """The rated opponent set plus the dev model's own rating.

    All mutating operations are serialised through one lock so workers and
    the trainer may share a pool instance.
    """

    dev_rating: float = 1000.0
    members: list[RatedCheckpoint] = field(default_factory=list)
    _admissions: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def admit(self, checkpoint_id: str) -> RatedCheckpoint:
        """Add a checkpoint at dev's rating, evicting the worst member if full."""
        with self._lock:
            if len(self.members) >= MAX_POOL_SIZE:
                # worst rating out first; equal ratings evict the oldest member
                worst = min(self.members, key=lambda m: (m.rating, m.admitted_at))
                self.members.remove(worst)
            member = RatedCheckpoint(checkpoint_id, self.dev_rating,
                                     admitted_at=self._admissions)
            self._admissions += 1
            self.members.append(member)
            return member

    def select_opponent(self, rng: np.random.Generator) -> RatedCheckpoint | None:
        """Draw a member with weight exp(-(dev - rating)/400); None means self-play."""
        with self._lock:
            if not self.members:
                return None
            weights = np.array([math.exp(-(self.dev_rating - m.rating) / 400.0)
                                for m in self.members])
            probs = weights / weights.sum()
            return self.members[rng.choice(len(self.members), p=probs)]

    def record_result(self, checkpoint_id: str, result: str) -> float:
        """Update ratings after one game, `result` seen from dev's side.

        The standard logistic update with K=32 moves dev and the member by
        opposite amounts, so the total rating mass is conserved. Returns
        dev's rating change.
        """
        if result not in _SCORES:
            raise ValueError(f"result must be one of {sorted(_SCORES)}, got {result!r}")
        with self._lock:
            member = self._find(checkpoint_id)
            expected = 1.0 / (1.0 + 10.0 ** ((member.rating - self.dev_rating) / 400.0))
            delta = ELO_K * (_SCORES[result] - expected)
            self.dev_rating += delta
            member.rating -= delta
            member.games += 1
            return delta

    def _find(self, checkpoint_id: str) -> RatedCheckpoint:
        for m in self.members:
            if m.checkpoint_id == checkpoint_id:
                return m
        raise KeyError(f"checkpoint {checkpoint_id!r} is not in the pool")

    def snapshot(self) -> list[RatedCheckpoint]:
        with self._lock:
            return [RatedCheckpoint(m.checkpoint_id, m.rating, m.games, m.admitted_at)
                    for m in self.members]

    # -- persistence -------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Text ledger: a dev line, then one `id rating games` line per member."""
        lines = [f"dev {self.dev_rating!r}"]
        with self._lock:
            for m in sorted(self.members, key=lambda m: m.admitted_at):
                lines.append(f"{m.checkpoint_id} {m.rating!r} {m.games}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "EloPool":
        pool = cls()
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "dev":
                pool.dev_rating = float(parts[1])
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected `id rating games`")
            member = RatedCheckpoint(parts[0], float(parts[1]), int(parts[2]),
                                     admitted_at=pool._admissions)
            pool._admissions += 1
            pool.members.append(member)
        if len(pool.members) > MAX_POOL_SIZE:
            raise ValueError(f"{path}: ledger holds more than {MAX_POOL_SIZE} members")
        return pool
