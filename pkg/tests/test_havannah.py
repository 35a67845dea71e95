from itertools import combinations

import numpy as np
import pytest

from zeroplay.core import Player
from zeroplay.games import get_game
from zeroplay.games.havannah import BLACK, BRIDGE, FORK, RING, WHITE, HavannahGame


def put(game, cells, axial_list, colour):
    radius = game.radius
    out = bytearray(cells)
    for q, r in axial_list:
        out[(r + radius) * game.side + (q + radius)] = colour
    return bytes(out)


def axial_index(game, q, r):
    return (r + game.radius) * game.side + (q + game.radius)


def test_cell_count_formula():
    for s in range(2, 8):
        game = HavannahGame(s)
        assert game.cell_count == 3 * s * s - 3 * s + 1


def test_win_class_counts_are_size_independent():
    for s in (3, 5, 8):
        game = HavannahGame(s)
        assert len(game.corners) == 6
        sides = {i for i in game.side_of if i >= 0}
        assert sides == set(range(6))
        assert len(list(combinations(game.corners, 2))) == 15
        assert len(list(combinations(range(6), 3))) == 20


def test_bridge_between_adjacent_corners():
    game = HavannahGame(4)
    r = game.radius
    # stones along the q = R edge join corners (R, -R) and (R, 0)
    path = [(r, rr) for rr in range(-r, 1)]
    cells = put(game, bytes(game.side * game.side), path, BLACK)
    assert game.detect_win(cells, axial_index(game, r, 0)) == BRIDGE


def test_fork_on_three_sides():
    game = HavannahGame(4)
    # a Y from the centre to three different sides, avoiding every corner
    stones = [
        (0, 0),
        (1, 0), (2, 0), (3, -1),    # side q = R
        (-1, 0), (-2, 0), (-3, 1),  # side q = -R
        (0, 1), (0, 2), (-1, 3),    # side r = R
    ]
    cells = put(game, bytes(game.side * game.side), stones, WHITE)
    assert game.detect_win(cells, axial_index(game, 0, 0)) == FORK


def test_ring_around_any_interior_cell_regardless_of_content():
    game = HavannahGame(4)
    centre = (0, 0)
    ring = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
    for content in ("empty", "own", "enemy"):
        cells = bytes(game.side * game.side)
        if content == "own":
            cells = put(game, cells, [centre], BLACK)
        elif content == "enemy":
            cells = put(game, cells, [centre], WHITE)
        cells = put(game, cells, ring, BLACK)
        assert game.detect_win(cells, axial_index(game, *ring[0])) == RING, content


def test_six_stone_hexagon_is_ring_at_every_interior_cell():
    game = HavannahGame(5)
    offsets = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
    radius = game.radius
    for q0 in range(-radius + 1, radius):
        for r0 in range(-radius + 1, radius):
            if abs(q0) > radius or abs(r0) > radius or abs(q0 + r0) > radius:
                continue
            ring = [(q0 + dq, r0 + dr) for dq, dr in offsets]
            if any(abs(q) > radius or abs(r) > radius or abs(q + r) > radius for q, r in ring):
                continue
            cells = put(game, bytes(game.side * game.side), [(q0, r0)], WHITE)
            cells = put(game, cells, ring, BLACK)
            assert game.detect_win(cells, axial_index(game, *ring[0])) == RING


def test_blob_without_hole_is_not_a_ring():
    game = HavannahGame(4)
    blob = [(0, 0), (1, 0), (0, 1), (1, -1)]  # solid diamond, no enclosure
    cells = put(game, bytes(game.side * game.side), blob, BLACK)
    assert game.detect_win(cells, axial_index(game, 0, 0)) is None


def test_open_loop_is_not_a_ring():
    game = HavannahGame(4)
    almost = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1)]  # one gap remains
    cells = put(game, bytes(game.side * game.side), almost, BLACK)
    assert game.detect_win(cells, axial_index(game, 1, 0)) is None


def test_pie_rule_swap():
    game = get_game("havannah4")
    state = game.initial_state()
    first_cell = game.legal_actions(state)[0]
    state = game.apply(state, first_cell)
    assert game.swap_action in game.legal_actions(state)
    swapped = game.apply(state, game.swap_action)
    assert swapped.swapped and swapped.black_player == Player.SECOND


def test_encode_marks_board_shape():
    game = get_game("havannah3")
    planes = game.encode(game.initial_state())
    assert planes.shape == (3, 5, 5)
    assert planes[2].sum() == game.cell_count  # ones exactly on playable cells
    assert planes[2, 0, 0] == 0.0  # array corner is off-board


def test_random_games_terminate_with_valid_status():
    rng = np.random.default_rng(3)
    game = get_game("havannah3")
    for _ in range(30):
        state = game.initial_state()
        while not state.status.is_terminal:
            acts = game.legal_actions(state)
            state = game.apply(state, acts[rng.integers(len(acts))])
        assert state.status.kind in ("win", "draw")
        if state.status.kind == "win":
            assert state.win_kind in (BRIDGE, FORK, RING)
