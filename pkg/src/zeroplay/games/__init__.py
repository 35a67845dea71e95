"""Game registry: resolve string ids like `hex7` or `connect4x4k3` to rule objects."""

from __future__ import annotations

import re

from ..core import Game
from .connect import ConnectGame, ConnectState
from .ewn import EwnGame, EwnState
from .havannah import HavannahGame, HavannahState
from .hex import HexGame, HexState

_PATTERNS: list[tuple[re.Pattern, str]] = [
    (re.compile(r"^hex(\d+)$"), "hex"),
    (re.compile(r"^havannah(\d+)$"), "havannah"),
    (re.compile(r"^connect(\d+)x(\d+)k(\d+)$"), "connect"),
    (re.compile(r"^ewn$"), "ewn"),
]

GAME_FAMILIES = {
    "hex": "hex{N} - Hex on an N x N rhombus, pie rule",
    "havannah": "havannah{S} - Havannah with base size S, pie rule",
    "connect": "connect{W}x{H}k{K} - drop K in a row on a W x H grid",
    "ewn": "ewn - EinStein wuerfelt nicht (dice game, 5 x 5)",
}

EXAMPLE_IDS = ["hex7", "hex9", "hex13", "havannah5", "havannah8", "connect7x6k4", "connect4x4k3", "ewn"]

_cache: dict[str, Game] = {}


def game_family(game_id: str) -> str:
    for pattern, family in _PATTERNS:
        if pattern.match(game_id):
            return family
    raise KeyError(f"unknown game id {game_id!r}")


def get_game(game_id: str) -> Game:
    """Resolve a game id; instances are cached and shareable."""
    if game_id in _cache:
        return _cache[game_id]
    m = re.match(r"^hex(\d+)$", game_id)
    if m:
        game: Game = HexGame(int(m.group(1)))
    else:
        m = re.match(r"^havannah(\d+)$", game_id)
        if m:
            game = HavannahGame(int(m.group(1)))
        else:
            m = re.match(r"^connect(\d+)x(\d+)k(\d+)$", game_id)
            if m:
                game = ConnectGame(int(m.group(1)), int(m.group(2)), int(m.group(3)))
            elif game_id == "ewn":
                game = EwnGame()
            else:
                raise KeyError(f"unknown game id {game_id!r}")
    _cache[game_id] = game
    return game


__all__ = [
    "ConnectGame", "ConnectState", "EwnGame", "EwnState", "HavannahGame",
    "HavannahState", "HexGame", "HexState", "GAME_FAMILIES", "EXAMPLE_IDS",
    "game_family", "get_game",
]
