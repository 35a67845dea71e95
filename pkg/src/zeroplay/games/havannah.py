"""Havannah on a hexagonal board of hexagonal cells.

Axial coordinates (q, r) with |q| <= R, |r| <= R, |q + r| <= R for radius
R = base_size - 1 are embedded into a (2R+1) x (2R+1) tensor at
row = r + R, col = q + R; array cells outside the hexagon are never
playable. Adjacency offsets match the Hex rhombus convention.

A move wins by Bridge (chain holds two of the six corners), Fork (chain
touches three of the six sides, corners excluded) or Ring (the mover's
stones enclose at least one cell, whatever that cell contains).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

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

EMPTY, BLACK, WHITE = 0, 1, 2

NEIGHBOR_OFFSETS = ((-1, 0), (1, 0), (0, -1), (0, 1), (-1, 1), (1, -1))

BRIDGE, FORK, RING = "bridge", "fork", "ring"


@dataclass(frozen=True)
class HavannahState(GameState):
    cells: bytes
    ply: int
    swapped: bool
    status: GameStatus
    win_kind: str | None = None

    @property
    def player_to_move(self) -> Player:
        return Player.FIRST if self.ply % 2 == 0 else Player.SECOND

    @property
    def black_player(self) -> Player:
        return Player.SECOND if self.swapped else Player.FIRST

    @property
    def colour_to_move(self) -> int:
        return BLACK if (self.ply % 2 == 0) != self.swapped else WHITE


class HavannahGame(Game):
    """Havannah rules for base size S >= 2 (board of 3S^2 - 3S + 1 cells)."""

    board_kind = "hex-hex"
    pie_rule = True

    def __init__(self, base_size: int, pie_rule: bool = True):
        if base_size < 2:
            raise ValueError("base size must be >= 2")
        self.base_size = base_size
        self.pie_rule = pie_rule
        self.id = f"havannah{base_size}"
        side = 2 * base_size - 1
        self.side = side
        self.action_space = ActionSpace(2, side, side)
        self.swap_action = self.action_space.index(1, 0, 0)

        radius = base_size - 1
        self.radius = radius
        valid = bytearray(side * side)
        for row in range(side):
            for col in range(side):
                q, r = col - radius, row - radius
                if abs(q) <= radius and abs(r) <= radius and abs(q + r) <= radius:
                    valid[row * side + col] = 1
        self.valid = bytes(valid)
        self.cell_count = sum(valid)
        self._neighbors: list[tuple[int, ...]] = []
        for i in range(side * side):
            row, col = divmod(i, side)
            ns = []
            if valid[i]:
                for dr, dc in NEIGHBOR_OFFSETS:
                    nr, nc = row + dr, col + dc
                    if 0 <= nr < side and 0 <= nc < side and valid[nr * side + nc]:
                        ns.append(nr * side + nc)
            self._neighbors.append(tuple(ns))

        # Corner cells: the six extreme points of the hexagon, in axial coords.
        corner_axial = [
            (radius, 0), (radius, -radius), (0, -radius),
            (-radius, 0), (-radius, radius), (0, radius),
        ]
        self.corners = frozenset((r + radius) * side + (q + radius) for q, r in corner_axial)
        # Side index per cell (0..5), -1 elsewhere; corners belong to no side.
        self.side_of = [-1] * (side * side)
        self.border = set()
        for i in range(side * side):
            if not valid[i]:
                continue
            row, col = divmod(i, side)
            q, r = col - radius, row - radius
            s = -q - r
            if max(abs(q), abs(r), abs(s)) < radius:
                continue
            self.border.add(i)
            if i in self.corners:
                continue
            if q == radius:
                self.side_of[i] = 0
            elif s == -radius:
                self.side_of[i] = 1
            elif r == -radius:
                self.side_of[i] = 2
            elif q == -radius:
                self.side_of[i] = 3
            elif s == radius:
                self.side_of[i] = 4
            else:  # r == radius
                self.side_of[i] = 5

    def initial_state(self) -> HavannahState:
        return HavannahState(bytes(self.side * self.side), 0, False, ONGOING)

    def playable_cells(self) -> list[tuple[int, int]]:
        return [divmod(i, self.side) for i in range(self.side * self.side) if self.valid[i]]

    def legal_actions(self, state: HavannahState) -> list[int]:
        if state.status.is_terminal:
            return []
        acts = [
            i for i in range(self.side * self.side)
            if self.valid[i] and state.cells[i] == EMPTY
        ]
        if self.pie_rule and state.ply == 1:
            acts.append(self.swap_action)
        return acts

    def apply(self, state: HavannahState, action: int) -> HavannahState:
        if state.status.is_terminal:
            raise IllegalActionError("game is over")
        if action == self.swap_action:
            if not (self.pie_rule and state.ply == 1):
                raise IllegalActionError("swap is only legal at ply 1")
            return replace(state, ply=state.ply + 1, swapped=True)
        ch, row, col = self.action_space.unravel(action)
        i = row * self.side + col
        if ch != 0 or not self.valid[i]:
            raise IllegalActionError(f"({ch},{row},{col}) is not a playable cell")
        if state.cells[i] != EMPTY:
            raise IllegalActionError(f"cell ({row},{col}) is occupied")
        colour = state.colour_to_move
        cells = bytearray(state.cells)
        cells[i] = colour
        cells = bytes(cells)
        kind = self.detect_win(cells, i)
        if kind is not None:
            winner = state.black_player if colour == BLACK else state.black_player.opponent
            return HavannahState(cells, state.ply + 1, state.swapped, GameStatus.win(winner), kind)
        occupied = sum(1 for j in range(len(cells)) if cells[j] != EMPTY)
        status = DRAW if occupied == self.cell_count else ONGOING
        return HavannahState(cells, state.ply + 1, state.swapped, status)

    def detect_win(self, cells: bytes, last_move: int) -> str | None:
        """Win class completed by the stone at `last_move`, if any.

        Bridge and Fork are read off the chain through the last stone. The
        ring test marks every non-chain cell reachable from the board border;
        a ring exists iff some cell is cut off, or some interior chain stone
        has all six neighbours in the chain (a loop around one's own stone).
        """
        colour = cells[last_move]
        if colour == EMPTY:
            raise ValueError("last_move must be occupied")
        group = self._group(cells, last_move, colour)
        corners = sum(1 for i in group if i in self.corners)
        if corners >= 2:
            return BRIDGE
        sides = {self.side_of[i] for i in group if self.side_of[i] >= 0}
        if len(sides) >= 3:
            return FORK
        if self._has_ring(cells, group):
            return RING
        return None

    def _group(self, cells: bytes, start: int, colour: int) -> set[int]:
        group = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j in self._neighbors[i]:
                if cells[j] == colour and j not in group:
                    group.add(j)
                    stack.append(j)
        return group

    def _has_ring(self, cells: bytes, group: set[int]) -> bool:
        reached = bytearray(self.side * self.side)
        stack = []
        for i in self.border:
            if i not in group:
                reached[i] = 1
                stack.append(i)
        while stack:
            i = stack.pop()
            for j in self._neighbors[i]:
                if not reached[j] and j not in group:
                    reached[j] = 1
                    stack.append(j)
        for i in range(self.side * self.side):
            if self.valid[i] and not reached[i] and i not in group:
                return True
        for i in group:
            if i in self.border:
                continue
            if all(j in group for j in self._neighbors[i]):
                return True
        return False

    def encode(self, state: HavannahState) -> np.ndarray:
        side = self.side
        grid = np.frombuffer(state.cells, dtype=np.uint8).reshape(side, side)
        mover = state.colour_to_move
        planes = np.zeros((3, side, side), dtype=np.float32)
        planes[0] = grid == mover
        planes[1] = grid == (BLACK + WHITE - mover)
        planes[2] = np.frombuffer(self.valid, dtype=np.uint8).reshape(side, side)
        return planes

    def render(self, state: HavannahState) -> str:
        side = self.side
        symbols = ".XO"
        lines = []
        for row in range(side):
            cols = [
                symbols[state.cells[row * side + col]]
                for col in range(side)
                if self.valid[row * side + col]
            ]
            pad = abs(self.radius - row)
            lines.append(" " * pad + " ".join(cols))
        black = "First" if state.black_player == Player.FIRST else "Second"
        lines.append(f"X=Black ({black}), O=White, ply {state.ply}")
        return "\n".join(lines)
