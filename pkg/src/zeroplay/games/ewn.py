"""EinStein wuerfelt nicht on the standard 5x5 board.

Decision and chance nodes alternate: every move is followed by a die roll
for the other player, and the game opens with a roll for the first player.
The first player starts in the top-left triangle and races to (4, 4); the
second player mirrors. The rolled piece must move; if it was captured, the
nearest surviving lower and higher numbers are both movable. Moving onto
any occupied cell captures the occupant, own pieces included.

Actions are (direction channel, row, col) of the piece being moved:
channel 0 = sideways (towards the goal column), 1 = vertical, 2 = diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import (
    ONGOING,
    ActionSpace,
    ChanceNodeError,
    Game,
    GameState,
    GameStatus,
    IllegalActionError,
    Player,
)

SIZE = 5

# cell value encoding: 0 empty, 1..6 first player's pieces, 9..14 second's
_SECOND_OFFSET = 8

_START_FIRST = {(0, 0): 1, (0, 1): 2, (0, 2): 3, (1, 0): 4, (1, 1): 5, (2, 0): 6}
_START_SECOND = {(4, 4): 1, (4, 3): 2, (4, 2): 3, (3, 4): 4, (3, 3): 5, (2, 4): 6}

# per-player move directions, indexed by action channel
_DIRS = {
    Player.FIRST: ((0, 1), (1, 0), (1, 1)),
    Player.SECOND: ((0, -1), (-1, 0), (-1, -1)),
}
_GOAL = {Player.FIRST: (SIZE - 1) * SIZE + (SIZE - 1), Player.SECOND: 0}


@dataclass(frozen=True)
class EwnState(GameState):
    cells: bytes
    pending_die: int | None  # None at chance nodes
    ply: int
    status: GameStatus

    @property
    def player_to_move(self) -> Player:
        return Player.FIRST if self.ply % 2 == 0 else Player.SECOND

    @property
    def is_chance(self) -> bool:
        return self.pending_die is None and not self.status.is_terminal


def _piece_value(player: Player, number: int) -> int:
    return number if player == Player.FIRST else number + _SECOND_OFFSET


def _owner(value: int) -> Player | None:
    if value == 0:
        return None
    return Player.FIRST if value <= 6 else Player.SECOND


class EwnGame(Game):
    board_kind = "square"
    pie_rule = False

    def __init__(self):
        self.id = "ewn"
        self.action_space = ActionSpace(3, SIZE, SIZE)

    def initial_state(self) -> EwnState:
        cells = bytearray(SIZE * SIZE)
        for (r, c), n in _START_FIRST.items():
            cells[r * SIZE + c] = _piece_value(Player.FIRST, n)
        for (r, c), n in _START_SECOND.items():
            cells[r * SIZE + c] = _piece_value(Player.SECOND, n)
        return EwnState(bytes(cells), None, 0, ONGOING)

    def chance_outcomes(self, state: EwnState) -> list[tuple[float, EwnState]]:
        if not state.is_chance:
            raise ChanceNodeError("chance outcomes are only defined at chance nodes")
        return [
            (1.0 / 6.0, EwnState(state.cells, die, state.ply, state.status))
            for die in range(1, 7)
        ]

    def movable_numbers(self, state: EwnState) -> list[int]:
        """Piece numbers the mover may move for the pending die value."""
        if state.pending_die is None:
            raise ChanceNodeError("no die has been rolled")
        mover = state.player_to_move
        alive = sorted(
            v if mover == Player.FIRST else v - _SECOND_OFFSET
            for v in state.cells
            if _owner(v) == mover
        )
        die = state.pending_die
        if die in alive:
            return [die]
        lower = [n for n in alive if n < die]
        higher = [n for n in alive if n > die]
        numbers = []
        if lower:
            numbers.append(lower[-1])
        if higher:
            numbers.append(higher[0])
        return numbers

    def legal_actions(self, state: EwnState) -> list[int]:
        if state.status.is_terminal:
            return []
        if state.is_chance:
            raise ChanceNodeError("legal actions are undefined at chance nodes")
        mover = state.player_to_move
        acts = []
        for number in self.movable_numbers(state):
            value = _piece_value(mover, number)
            pos = state.cells.index(value)
            r, c = divmod(pos, SIZE)
            for channel, (dr, dc) in enumerate(_DIRS[mover]):
                nr, nc = r + dr, c + dc
                if 0 <= nr < SIZE and 0 <= nc < SIZE:
                    acts.append(self.action_space.index(channel, r, c))
        return sorted(set(acts))

    def apply(self, state: EwnState, action: int) -> EwnState:
        if state.status.is_terminal:
            raise IllegalActionError("game is over")
        if state.is_chance:
            raise ChanceNodeError("apply a die roll via chance_outcomes, not an action")
        channel, r, c = self.action_space.unravel(action)
        mover = state.player_to_move
        value = state.cells[r * SIZE + c]
        if _owner(value) != mover:
            raise IllegalActionError(f"({r},{c}) holds no piece of the player to move")
        number = value if mover == Player.FIRST else value - _SECOND_OFFSET
        if number not in self.movable_numbers(state):
            raise IllegalActionError(f"piece {number} may not move for die {state.pending_die}")
        dr, dc = _DIRS[mover][channel]
        nr, nc = r + dr, c + dc
        if not (0 <= nr < SIZE and 0 <= nc < SIZE):
            raise IllegalActionError("move leaves the board")
        cells = bytearray(state.cells)
        cells[r * SIZE + c] = 0
        cells[nr * SIZE + nc] = value  # capture by replacement, own pieces included
        cells = bytes(cells)
        opponent = mover.opponent
        won = (nr * SIZE + nc) == _GOAL[mover] or not any(
            _owner(v) == opponent for v in cells
        )
        status = GameStatus.win(mover) if won else ONGOING
        return EwnState(cells, None, state.ply + 1, status)

    def encode(self, state: EwnState) -> np.ndarray:
        if state.is_chance:
            raise ChanceNodeError("chance nodes are never evaluated by the network")
        mover = state.player_to_move
        planes = np.zeros((3, SIZE, SIZE), dtype=np.float32)
        for pos, v in enumerate(state.cells):
            owner = _owner(v)
            if owner is None:
                continue
            r, c = divmod(pos, SIZE)
            planes[0 if owner == mover else 1, r, c] = 1.0
        planes[2] = 1.0
        return planes

    def render(self, state: EwnState) -> str:
        rows = []
        for r in range(SIZE):
            row = []
            for c in range(SIZE):
                v = state.cells[r * SIZE + c]
                if v == 0:
                    row.append(" . ")
                elif v <= 6:
                    row.append(f"A{v} ")
                else:
                    row.append(f"b{v - _SECOND_OFFSET} ")
            rows.append("".join(row))
        die = state.pending_die
        rows.append(f"to move: {'A' if state.player_to_move == Player.FIRST else 'b'}, "
                    f"die: {die if die is not None else '-'}, ply {state.ply}")
        return "\n".join(rows)
