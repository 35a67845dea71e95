"""Connect-K on a W x H grid with gravity.

Row 0 is the bottom row; a move drops a piece to the lowest empty row of a
column. The action for a drop is the landing cell (channel 0), so every
action stays inside the spatial policy tensor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import (
    DRAW,
    ONGOING,
    ActionSpace,
    Game,
    GameState,
    GameStatus,
    IllegalActionError,
    Player,
)


@dataclass(frozen=True)
class ConnectState(GameState):
    masks: tuple[int, int]  # per-player bitboards, bit index = row * width + col
    heights: tuple[int, ...]
    ply: int
    status: GameStatus

    @property
    def player_to_move(self) -> Player:
        return Player.FIRST if self.ply % 2 == 0 else Player.SECOND


class ConnectGame(Game):
    board_kind = "square"
    pie_rule = False

    def __init__(self, width: int, height: int, run: int):
        if width < 1 or height < 1:
            raise ValueError("board dimensions must be >= 1")
        if run < 2:
            raise ValueError("winning run must be >= 2")
        self.width = width
        self.height = height
        self.run = run
        self.id = f"connect{width}x{height}k{run}"
        self.action_space = ActionSpace(1, height, width)
        self._lines_through = self._build_lines()

    def _build_lines(self) -> list[tuple[int, ...]]:
        """For each cell, the bitmasks of every K-run through it."""
        w, h, k = self.width, self.height, self.run
        per_cell: list[list[int]] = [[] for _ in range(w * h)]
        for r in range(h):
            for c in range(w):
                for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
                    er, ec = r + (k - 1) * dr, c + (k - 1) * dc
                    if not (0 <= er < h and 0 <= ec < w):
                        continue
                    mask = 0
                    cells = []
                    for step in range(k):
                        cell = (r + step * dr) * w + (c + step * dc)
                        mask |= 1 << cell
                        cells.append(cell)
                    for cell in cells:
                        per_cell[cell].append(mask)
        return [tuple(masks) for masks in per_cell]

    def initial_state(self) -> ConnectState:
        return ConnectState((0, 0), (0,) * self.width, 0, ONGOING)

    def legal_actions(self, state: ConnectState) -> list[int]:
        if state.status.is_terminal:
            return []
        w = self.width
        return [state.heights[c] * w + c for c in range(w) if state.heights[c] < self.height]

    def apply(self, state: ConnectState, action: int) -> ConnectState:
        if state.status.is_terminal:
            raise IllegalActionError("game is over")
        ch, row, col = self.action_space.unravel(action)
        if ch != 0:
            raise IllegalActionError(f"channel {ch} is not a drop")
        if not (0 <= col < self.width) or state.heights[col] >= self.height:
            raise IllegalActionError(f"column {col} is full")
        if row != state.heights[col]:
            raise IllegalActionError(
                f"piece in column {col} lands on row {state.heights[col]}, not {row}"
            )
        mover = state.player_to_move
        cell = row * self.width + col
        mask = state.masks[mover] | (1 << cell)
        masks = (mask, state.masks[1]) if mover == Player.FIRST else (state.masks[0], mask)
        heights = list(state.heights)
        heights[col] += 1
        status = ONGOING
        if any(mask & line == line for line in self._lines_through[cell]):
            status = GameStatus.win(mover)
        elif state.ply + 1 == self.width * self.height:
            status = DRAW
        return ConnectState(masks, tuple(heights), state.ply + 1, status)

    def scan_status(self, state: ConnectState) -> GameStatus:
        """Full-board status recomputed from scratch; cross-checks `apply`."""
        for player in (Player.FIRST, Player.SECOND):
            mask = state.masks[player]
            seen = set()
            for cell in range(self.width * self.height):
                if mask >> cell & 1:
                    for line in self._lines_through[cell]:
                        if line not in seen and mask & line == line:
                            return GameStatus.win(player)
                        seen.add(line)
        if state.ply == self.width * self.height:
            return DRAW
        return ONGOING

    def encode(self, state: ConnectState) -> np.ndarray:
        h, w = self.height, self.width
        mover = state.player_to_move
        planes = np.zeros((3, h, w), dtype=np.float32)
        for cell in range(w * h):
            r, c = divmod(cell, w)
            if state.masks[mover] >> cell & 1:
                planes[0, r, c] = 1.0
            elif state.masks[mover.opponent] >> cell & 1:
                planes[1, r, c] = 1.0
        planes[2] = 1.0
        return planes

    def render(self, state: ConnectState) -> str:
        symbols = {0: ".", 1: "X", 2: "O"}
        rows = []
        for r in range(self.height - 1, -1, -1):
            row = []
            for c in range(self.width):
                cell = r * self.width + c
                v = 1 if state.masks[0] >> cell & 1 else 2 if state.masks[1] >> cell & 1 else 0
                row.append(symbols[v])
            rows.append(" ".join(row))
        rows.append(" ".join(str(c) for c in range(self.width)))
        rows.append(f"X=First, O=Second, ply {state.ply}")
        return "\n".join(rows)
