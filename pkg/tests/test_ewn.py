import numpy as np
import pytest

from zeroplay.core import ChanceNodeError, Player
from zeroplay.games import get_game
from zeroplay.games.ewn import SIZE, EwnState


@pytest.fixture
def game():
    return get_game("ewn")


def decision_state(game, die):
    outcomes = game.chance_outcomes(game.initial_state())
    return outcomes[die - 1][1]


def test_initial_state_is_chance_node(game):
    s = game.initial_state()
    assert s.is_chance
    with pytest.raises(ChanceNodeError):
        game.legal_actions(s)
    with pytest.raises(ChanceNodeError):
        game.encode(s)


def test_decision_state_encodes_mover_relative(game):
    s = decision_state(game, 1)
    planes = game.encode(s)
    assert planes.shape == (3, 5, 5)
    assert planes[0].sum() == 6 and planes[1].sum() == 6
    assert planes[0, 0, 0] == 1.0  # first player's own pieces on the mover plane


def test_chance_outcomes_fair_die(game):
    outs = game.chance_outcomes(game.initial_state())
    assert len(outs) == 6
    assert all(abs(p - 1 / 6) < 1e-12 for p, _ in outs)
    assert abs(sum(p for p, _ in outs) - 1.0) < 1e-12
    assert all(not s.is_chance for _, s in outs)


def test_chance_outcomes_rejected_on_decision_node(game):
    with pytest.raises(ChanceNodeError):
        game.chance_outcomes(decision_state(game, 3))


def test_rolled_piece_must_move(game):
    s = decision_state(game, 3)
    assert game.movable_numbers(s) == [3]
    # piece 3 starts at (0,2); all three directions stay on board
    acts = {game.action_space.unravel(a) for a in game.legal_actions(s)}
    assert acts == {(0, 0, 2), (1, 0, 2), (2, 0, 2)}


def test_captured_piece_falls_back_to_neighbours(game):
    s = decision_state(game, 3)
    cells = bytearray(s.cells)
    cells[0 * SIZE + 2] = 0  # piece 3 gone
    s = EwnState(bytes(cells), 3, s.ply, s.status)
    assert game.movable_numbers(s) == [2, 4]
    cells[0 * SIZE + 1] = 0  # piece 2 gone as well
    s = EwnState(bytes(cells), 3, s.ply, s.status)
    assert game.movable_numbers(s) == [1, 4]


def test_move_produces_chance_node_and_ply_advances(game):
    s = decision_state(game, 6)
    nxt = game.apply(s, game.legal_actions(s)[0])
    assert nxt.is_chance
    assert nxt.ply == s.ply + 1
    assert nxt.player_to_move == Player.SECOND


def test_capture_on_entry(game):
    s = decision_state(game, 1)
    # walk piece 1 diagonally from (0,0); eventually it hits enemy territory
    diag = game.action_space.index(2, 0, 0)
    nxt = game.apply(s, diag)
    assert nxt.cells[1 * SIZE + 1] == 1  # own piece 5 at (1,1) was captured
    assert 5 not in [v for v in nxt.cells if 1 <= v <= 6]


def test_reaching_goal_wins(game):
    s = decision_state(game, 1)
    # march piece 1 down the diagonal; second player shuffles piece 1 leftwards
    for _ in range(3):
        s = game.apply(s, game.action_space.index(2, *divmod(s.cells.index(1), SIZE)))
        assert not s.status.is_terminal
        s = game.chance_outcomes(s)[0][1]  # second player rolls 1
        r, c = divmod(s.cells.index(1 + 8), SIZE)
        s = game.apply(s, game.action_space.index(0, r, c))
        assert not s.status.is_terminal
        s = game.chance_outcomes(s)[0][1]  # first player rolls 1
    s = game.apply(s, game.action_space.index(2, *divmod(s.cells.index(1), SIZE)))
    assert s.status.winner == Player.FIRST


def test_random_games_terminate(game):
    rng = np.random.default_rng(2)
    for _ in range(50):
        s = game.initial_state()
        plies = 0
        while not s.status.is_terminal:
            if s.is_chance:
                outs = game.chance_outcomes(s)
                s = outs[rng.integers(6)][1]
                continue
            acts = game.legal_actions(s)
            assert acts, "decision nodes always have at least one move"
            s = game.apply(s, acts[rng.integers(len(acts))])
            plies += 1
        assert plies <= 250
        assert s.status.kind == "win"
