"""Hex on an N x N rhombus with the pie rule.

Cells use the rhombus embedding where the six neighbours of (r, c) are
(r-1, c), (r+1, c), (r, c-1), (r, c+1), (r-1, c+1), (r+1, c-1).
Black owns the North and South edges (rows 0 and N-1), White owns West and
East (columns 0 and N-1).
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


class UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:  # path compression
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if self.rank[ri] < self.rank[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        if self.rank[ri] == self.rank[rj]:
            self.rank[ri] += 1


def hex_winner(cells: bytes, size: int) -> int | None:
    """Winning colour (BLACK or WHITE) of a Hex position, or None.

    Union-find over the cells plus four virtual edge nodes: Black wins iff a
    black chain joins North and South, White iff a white chain joins West
    and East.
    """
    n = size
    north, south, west, east = n * n, n * n + 1, n * n + 2, n * n + 3
    uf = UnionFind(n * n + 4)
    for r in range(n):
        base = r * n
        for c in range(n):
            colour = cells[base + c]
            if colour == EMPTY:
                continue
            i = base + c
            if colour == BLACK:
                if r == 0:
                    uf.union(i, north)
                if r == n - 1:
                    uf.union(i, south)
            else:
                if c == 0:
                    uf.union(i, west)
                if c == n - 1:
                    uf.union(i, east)
            # union with the already-scanned half of the neighbourhood
            if r > 0 and cells[i - n] == colour:
                uf.union(i, i - n)
            if c > 0 and cells[i - 1] == colour:
                uf.union(i, i - 1)
            if r > 0 and c < n - 1 and cells[i - n + 1] == colour:
                uf.union(i, i - n + 1)
    if uf.find(north) == uf.find(south):
        return BLACK
    if uf.find(west) == uf.find(east):
        return WHITE
    return None


@dataclass(frozen=True)
class HexState(GameState):
    cells: bytes
    ply: int
    swapped: bool
    status: GameStatus

    @property
    def player_to_move(self) -> Player:
        return Player.FIRST if self.ply % 2 == 0 else Player.SECOND

    @property
    def black_player(self) -> Player:
        """Who plays Black; flips from First to Second after a pie-rule swap."""
        return Player.SECOND if self.swapped else Player.FIRST

    @property
    def colour_to_move(self) -> int:
        return BLACK if (self.ply % 2 == 0) != self.swapped else WHITE


class HexGame(Game):
    """Hex rules, any board size >= 1, pie rule on by default.

    The swap is one extra action channel at position (0, 0), legal only at
    ply 1; it exchanges the players' colours and leaves the board unchanged.
    """

    board_kind = "hex-rhombus"
    pie_rule = True

    def __init__(self, size: int, pie_rule: bool = True):
        if size < 1:
            raise ValueError("board size must be >= 1")
        self.size = size
        self.pie_rule = pie_rule
        self.id = f"hex{size}"
        self.action_space = ActionSpace(2, size, size)
        self.swap_action = self.action_space.index(1, 0, 0)

    def initial_state(self) -> HexState:
        return HexState(bytes(self.size * self.size), 0, False, ONGOING)

    def legal_actions(self, state: HexState) -> list[int]:
        if state.status.is_terminal:
            return []
        n = self.size
        acts = [r * n + c for r in range(n) for c in range(n) if state.cells[r * n + c] == EMPTY]
        if self.pie_rule and state.ply == 1:
            acts.append(self.swap_action)
        return acts

    def apply(self, state: HexState, action: int) -> HexState:
        if state.status.is_terminal:
            raise IllegalActionError("game is over")
        n = self.size
        if action == self.swap_action:
            if not (self.pie_rule and state.ply == 1):
                raise IllegalActionError("swap is only legal at ply 1")
            return replace(state, ply=state.ply + 1, swapped=True)
        ch, r, c = self.action_space.unravel(action)
        if ch != 0:
            raise IllegalActionError(f"channel {ch} is not a placement")
        i = r * n + c
        if state.cells[i] != EMPTY:
            raise IllegalActionError(f"cell ({r},{c}) is occupied")
        colour = state.colour_to_move
        cells = bytearray(state.cells)
        cells[i] = colour
        cells = bytes(cells)
        status = ONGOING
        if self._wins(cells, colour, r, c):
            winner = state.black_player if colour == BLACK else state.black_player.opponent
            status = GameStatus.win(winner)
        elif EMPTY not in cells:
            status = DRAW  # unreachable in Hex; kept as a defensive default
        return HexState(cells, state.ply + 1, state.swapped, status)

    def _wins(self, cells: bytes, colour: int, r: int, c: int) -> bool:
        """Does the mover's chain through (r, c) now join its two edges?"""
        n = self.size
        seen = bytearray(n * n)
        stack = [r * n + c]
        seen[r * n + c] = 1
        lo = hi = False
        while stack:
            i = stack.pop()
            rr, cc = divmod(i, n)
            coord = rr if colour == BLACK else cc
            if coord == 0:
                lo = True
            if coord == n - 1:
                hi = True
            if lo and hi:
                return True
            for dr, dc in NEIGHBOR_OFFSETS:
                nr, nc = rr + dr, cc + dc
                if 0 <= nr < n and 0 <= nc < n:
                    j = nr * n + nc
                    if not seen[j] and cells[j] == colour:
                        seen[j] = 1
                        stack.append(j)
        return False

    def encode(self, state: HexState) -> np.ndarray:
        n = self.size
        grid = np.frombuffer(state.cells, dtype=np.uint8).reshape(n, n)
        mover = state.colour_to_move
        planes = np.zeros((3, n, n), dtype=np.float32)
        planes[0] = grid == mover
        planes[1] = grid == (BLACK + WHITE - mover)
        planes[2] = 1.0
        return planes

    def render(self, state: HexState) -> str:
        n = self.size
        symbols = ".XO"
        lines = ["  " + " ".join(chr(ord("a") + c) for c in range(n))]
        for r in range(n):
            row = " ".join(symbols[state.cells[r * n + c]] for c in range(n))
            lines.append(" " * r + f"{r:2d} " + row)
        black = "First" if state.black_player == Player.FIRST else "Second"
        lines.append(f"X=Black (N-S, {black}), O=White (W-E), ply {state.ply}")
        return "\n".join(lines)
