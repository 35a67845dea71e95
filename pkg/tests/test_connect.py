import numpy as np
import pytest

from zeroplay.core import DRAW, IllegalActionError, Player
from zeroplay.games import get_game

from .oracles import reachable_states


def drop(game, state, col):
    return game.apply(state, state.heights[col] * game.width + col)


def test_vertical_win():
    game = get_game("connect4x4k3")
    s = game.initial_state()
    for _ in range(2):
        s = drop(game, s, 0)
        s = drop(game, s, 1)
    s = drop(game, s, 0)
    assert s.status.winner == Player.FIRST


def test_full_board_without_line_is_draw():
    game = get_game("connect3x3k3")
    # column fills chosen so no three-in-a-row appears for either player
    s = game.initial_state()
    for col in (0, 1, 0, 1, 2, 0, 1, 2, 2):
        s = drop(game, s, col)
    assert s.status == DRAW
    assert game.scan_status(s) == DRAW


def test_full_column_has_no_action():
    game = get_game("connect3x3k3")
    s = game.initial_state()
    for _ in range(3):
        s = drop(game, s, 1)
    legal_cols = {a % game.width for a in game.legal_actions(s)}
    assert 1 not in legal_cols
    with pytest.raises(IllegalActionError):
        game.apply(s, game.action_space.index(0, 2, 1))


def test_actions_are_landing_cells():
    game = get_game("connect4x4k3")
    s = drop(game, game.initial_state(), 2)
    acts = game.legal_actions(s)
    assert game.action_space.index(0, 1, 2) in acts  # column 2 now lands on row 1
    assert game.action_space.index(0, 0, 2) not in acts


def test_status_agrees_with_scan_on_random_play():
    game = get_game("connect4x4k3")
    rng = np.random.default_rng(0)
    for _ in range(100):
        s = game.initial_state()
        while not s.status.is_terminal:
            assert game.scan_status(s) == s.status
            acts = game.legal_actions(s)
            s = game.apply(s, acts[rng.integers(len(acts))])
        assert game.scan_status(s) == s.status


def test_terminal_classification_matches_minimax_oracle():
    """Every reachable 3x3 K=3 state gets the status the exhaustive oracle implies."""
    game = get_game("connect3x3k3")
    states = reachable_states(game)
    assert len(states) > 500
    for s in states:
        assert game.scan_status(s) == s.status
        if s.status.is_terminal:
            assert len(game.legal_actions(s)) == 0
        else:
            assert len(game.legal_actions(s)) >= 1
