"""Shared game abstractions: players, statuses, action indexing, the game interface."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np


class GameError(ValueError):
    """Base class for rule violations and contract misuse."""


class IllegalActionError(GameError):
    """Raised when an action is not legal in the given state."""


class ChanceNodeError(GameError):
    """Raised when a decision-node operation is invoked on a chance node, or vice versa."""


class NotTerminalError(GameError):
    """Raised when a terminal-only operation is invoked on an ongoing state."""


class Player(IntEnum):
    FIRST = 0
    SECOND = 1

    @property
    def opponent(self) -> "Player":
        return Player(1 - self.value)


@dataclass(frozen=True)
class GameStatus:
    """Terminal classification of a state: ongoing, win for a player, or draw."""

    kind: str  # "ongoing" | "win" | "draw"
    winner: Player | None = None

    @property
    def is_terminal(self) -> bool:
        return self.kind != "ongoing"

    @staticmethod
    def win(player: Player) -> "GameStatus":
        return GameStatus("win", player)


ONGOING = GameStatus("ongoing")
DRAW = GameStatus("draw")


@dataclass(frozen=True)
class ActionSpace:
    """Bijection between (channel, row, col) triples and flat policy-tensor indices.

    Flat indices follow C-order over a (channels, height, width) tensor, so a
    network's policy output can be `.reshape(-1)`-ed and indexed directly.
    """

    channels: int
    height: int
    width: int

    @property
    def total(self) -> int:
        return self.channels * self.height * self.width

    def index(self, channel: int, row: int, col: int) -> int:
        if not (0 <= channel < self.channels):
            raise IndexError(f"channel {channel} out of range [0, {self.channels})")
        if not (0 <= row < self.height):
            raise IndexError(f"row {row} out of range [0, {self.height})")
        if not (0 <= col < self.width):
            raise IndexError(f"col {col} out of range [0, {self.width})")
        return (channel * self.height + row) * self.width + col

    def unravel(self, action: int) -> tuple[int, int, int]:
        if not (0 <= action < self.total):
            raise IndexError(f"action {action} out of range [0, {self.total})")
        col = action % self.width
        rest = action // self.width
        return rest // self.height, rest % self.height, col


class GameState:
    """Immutable snapshot of a position.

    Concrete games subclass this with their own storage. All states expose
    `ply`, `player_to_move`, `is_chance` and a cached `status`; applying an
    action never mutates the input state.
    """

    __slots__ = ()

    ply: int
    status: GameStatus

    @property
    def player_to_move(self) -> Player:
        raise NotImplementedError

    @property
    def is_chance(self) -> bool:
        return False


class Game(ABC):
    """Rules of one game: action space, legality, transitions and encoding.

    All methods are pure functions of their arguments; instances carry only
    immutable precomputed geometry and are safe to share between workers.
    """

    id: str
    action_space: ActionSpace
    board_kind: str = "square"  # "square" | "hex-rhombus" | "hex-hex"

    @abstractmethod
    def initial_state(self) -> GameState:
        ...

    @abstractmethod
    def legal_actions(self, state: GameState) -> list[int]:
        """Flat action indices legal in `state`. Empty for terminal states."""

    @abstractmethod
    def apply(self, state: GameState, action: int) -> GameState:
        """Successor of `state` after `action`; raises IllegalActionError otherwise."""

    @abstractmethod
    def encode(self, state: GameState) -> np.ndarray:
        """Feature planes (3, H, W) float32 from the mover's point of view.

        Plane 0 holds the mover's stones, plane 1 the opponent's, plane 2 is
        one on every playable cell (zero padding outside makes board borders
        visible to convolutions).
        """

    def status(self, state: GameState) -> GameStatus:
        return state.status

    def outcome(self, state: GameState, perspective: Player) -> int:
        """Final reward in {-1, 0, +1} for `perspective`. Terminal states only."""
        st = state.status
        if not st.is_terminal:
            raise NotTerminalError("outcome is only defined for terminal states")
        if st.kind == "draw":
            return 0
        return 1 if st.winner == perspective else -1

    def chance_outcomes(self, state: GameState) -> list[tuple[float, GameState]]:
        """(probability, successor) pairs for a chance node."""
        raise ChanceNodeError(f"{self.id} has no chance nodes")

    def legal_mask(self, state: GameState) -> np.ndarray:
        mask = np.zeros(self.action_space.total, dtype=bool)
        acts = self.legal_actions(state)
        if acts:
            mask[np.asarray(acts)] = True
        return mask

    def render(self, state: GameState) -> str:
        """ASCII board for terminal play and logs."""
        return repr(state)

    def playable_cells(self) -> list[tuple[int, int]]:
        """(row, col) pairs of real board cells inside the tensor rectangle."""
        h, w = self.action_space.height, self.action_space.width
        return [(r, c) for r in range(h) for c in range(w)]


def format_move_history(space: ActionSpace, actions: Iterable[int]) -> str:
    """One action per line as `channel,row,col`."""
    lines = []
    for a in actions:
        ch, r, c = space.unravel(a)
        lines.append(f"{ch},{r},{c}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_move_history(space: ActionSpace, text: str) -> list[int]:
    actions = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected `channel,row,col`, got {raw!r}")
        ch, r, c = (int(p) for p in parts)
        actions.append(space.index(ch, r, c))
    return actions


def replay_actions(game: Game, actions: Sequence[int]) -> GameState:
    """Replay a recorded action sequence from the initial state."""
    state = game.initial_state()
    for a in actions:
        state = game.apply(state, a)
    return state
