import math

import numpy as np
import pytest

from zeroplay.core import ChanceNodeError, NotTerminalError, Player
from zeroplay.games import get_game
from zeroplay.mcts import (
    PUCT,
    UCT,
    SearchConfig,
    SearchNode,
    add_dirichlet_noise,
    chance_step,
    masked_softmax,
    puct_score,
    run_search,
    uct_score,
    uniform_evaluator,
)

from .oracles import optimal_actions


def node_with(num_sims, total_reward, prior=0.0):
    n = SearchNode(None, Player.FIRST, prior)
    n.num_sims = num_sims
    n.total_reward = total_reward
    return n


class TestMaskedSoftmax:
    def test_equal_logits_uniform(self):
        p = masked_softmax(np.zeros(5), np.array([1, 1, 1, 0, 0], dtype=bool))
        np.testing.assert_allclose(p, [1 / 3, 1 / 3, 1 / 3, 0, 0])

    def test_single_legal_action(self):
        p = masked_softmax(np.array([3.0, -1.0]), np.array([False, True]))
        np.testing.assert_allclose(p, [0.0, 1.0])

    def test_hand_computed_two_way(self):
        p = masked_softmax(np.array([0.0, math.log(2)]), np.ones(2, dtype=bool), 1.0)
        np.testing.assert_allclose(p, [1 / 3, 2 / 3], atol=1e-12)

    def test_temperature_multiplies_logits(self):
        logits = np.array([0.0, math.log(2)])
        p = masked_softmax(logits, np.ones(2, dtype=bool), 2.0)
        np.testing.assert_allclose(p, [1 / 5, 4 / 5], atol=1e-12)

    def test_overflow_safe(self):
        p = masked_softmax(np.array([1e4, 1e4 - 1]), np.ones(2, dtype=bool))
        assert np.isfinite(p).all() and abs(p.sum() - 1) < 1e-12

    def test_all_illegal_rejected(self):
        with pytest.raises(ValueError):
            masked_softmax(np.zeros(3), np.zeros(3, dtype=bool))


class TestScores:
    def test_uct_unvisited_is_infinite(self):
        assert uct_score(node_with(0, 0.0), 5, 1.0) == math.inf

    def test_uct_k_zero_is_average(self):
        assert uct_score(node_with(4, 2.0), 9, 0.0) == pytest.approx(0.5)

    def test_uct_hand_value(self):
        # 0.5 + sqrt(ln 8 / 2)
        score = uct_score(node_with(2, 1.0), 8, 1.0)
        assert score == pytest.approx(0.5 + math.sqrt(math.log(8) / 2), abs=1e-12)
        assert score == pytest.approx(1.51967, abs=5e-6)

    def test_uct_argmax_invariant_under_reward_scaling(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            sims = rng.integers(1, 30, size=4)
            rewards = rng.uniform(-1, 1, size=4) * sims
            parent = int(sims.sum())
            k, scale = 1.3, 7.5
            base = [uct_score(node_with(int(s), r), parent, k) for s, r in zip(sims, rewards)]
            scaled = [uct_score(node_with(int(s), r * scale), parent, k * scale)
                      for s, r in zip(sims, rewards)]
            assert int(np.argmax(base)) == int(np.argmax(scaled))

    def test_puct_zero_prior_visited(self):
        assert puct_score(node_with(3, 0.9), 16) == pytest.approx(0.3)

    def test_puct_unvisited_child(self):
        assert puct_score(node_with(0, 0.0, prior=0.5), 9) == pytest.approx(1.5)

    def test_puct_hand_value(self):
        assert puct_score(node_with(3, 0.6, prior=0.4), 16) == pytest.approx(0.6)


class TestDirichletNoise:
    def test_epsilon_zero_identity(self):
        priors = np.array([0.25, 0.75, 0.0])
        out = add_dirichlet_noise(priors, np.array([1, 1, 0], dtype=bool), 0.3, 0.0,
                                  np.random.default_rng(0))
        np.testing.assert_array_equal(out, priors)

    def test_epsilon_one_single_action(self):
        priors = np.array([1.0, 0.0])
        out = add_dirichlet_noise(priors, np.array([1, 0], dtype=bool), 0.3, 1.0,
                                  np.random.default_rng(0))
        np.testing.assert_allclose(out, [1.0, 0.0])

    def test_sums_to_one_over_many_draws(self):
        rng = np.random.default_rng(42)
        legal = np.array([1, 0, 1, 1, 0, 1], dtype=bool)
        priors = masked_softmax(rng.normal(size=6), legal)
        for _ in range(1000):
            out = add_dirichlet_noise(priors, legal, 0.3, 0.25, rng)
            assert abs(out.sum() - 1.0) < 1e-9
            assert (out[~legal] == 0).all()


class TestChanceStep:
    def test_single_outcome(self):
        node = SearchNode(None, Player.FIRST)
        child = SearchNode(None, Player.FIRST)
        node.outcomes = [(1.0, child)]
        assert chance_step(node, np.random.default_rng(0)) is child

    def test_decision_node_rejected(self):
        with pytest.raises(ChanceNodeError):
            chance_step(SearchNode(None, Player.FIRST), np.random.default_rng(0))

    def test_frequencies_match_probabilities(self):
        game = get_game("ewn")
        cfg = SearchConfig(mode=UCT, simulations=60000, seed=9)
        root_chance = game.initial_state()
        node = SearchNode(root_chance, Player.FIRST)
        node.outcomes = [(p, SearchNode(s, Player.FIRST)) for p, s in game.chance_outcomes(root_chance)]
        rng = np.random.default_rng(cfg.seed)
        counts = np.zeros(6)
        for _ in range(cfg.simulations):
            child = chance_step(node, rng)
            counts[[c for _, c in node.outcomes].index(child)] += 1
        freqs = counts / counts.sum()
        assert np.all(np.abs(freqs - 1 / 6) < 0.01)


class TestRunSearch:
    def test_single_simulation_visits_one_child(self):
        game = get_game("connect3x3k3")
        res = run_search(game, game.initial_state(), SearchConfig(mode=UCT, simulations=1, seed=0))
        assert res.visits.sum() == 1
        assert res.visits[res.action] == 1

    def test_terminal_root_rejected(self):
        game = get_game("hex1")
        s = game.apply(game.initial_state(), 0)
        with pytest.raises(NotTerminalError):
            run_search(game, s, SearchConfig(mode=UCT, simulations=1))

    def test_chance_root_rejected(self):
        game = get_game("ewn")
        with pytest.raises(ChanceNodeError):
            run_search(game, game.initial_state(), SearchConfig(mode=UCT, simulations=1))

    def test_visit_conservation_both_modes(self):
        game = get_game("connect4x4k3")
        for mode, ev in ((UCT, None), (PUCT, uniform_evaluator)):
            res = run_search(game, game.initial_state(),
                             SearchConfig(mode=mode, simulations=137, seed=3), evaluator=ev)
            assert res.visits.sum() == 137
            assert abs(res.distribution.sum() - 1.0) < 1e-12
            legal = set(game.legal_actions(game.initial_state()))
            assert all(res.distribution[a] == 0 for a in range(game.action_space.total)
                       if a not in legal)

    def test_node_visit_identity_below_root(self):
        game = get_game("connect3x3k3")
        res = run_search(game, game.initial_state(),
                         SearchConfig(mode=PUCT, simulations=300, seed=1),
                         evaluator=uniform_evaluator)

        def check(node):
            if node.children is None:
                return
            child_total = sum(c.num_sims for c in node.children.values())
            if node.num_sims > 0:
                assert node.num_sims == 1 + child_total
            for c in node.children.values():
                check(c)

        for child in res.root.children.values():
            check(child)
        # the root itself carries its expansion evaluation plus all simulations
        assert res.root.num_sims == 1 + res.visits.sum()

    def test_rewards_bounded(self):
        game = get_game("connect3x3k3")
        res = run_search(game, game.initial_state(),
                         SearchConfig(mode=UCT, simulations=500, seed=5))

        def walk(node):
            assert -1.0 <= node.avg_reward <= 1.0
            for c in (node.children or {}).values():
                walk(c)

        walk(res.root)

    def test_determinism(self):
        game = get_game("connect4x4k3")
        cfg = SearchConfig(mode=UCT, simulations=400, seed=12)
        a = run_search(game, game.initial_state(), cfg)
        b = run_search(game, game.initial_state(), cfg)
        assert a.action == b.action
        np.testing.assert_array_equal(a.visits, b.visits)

    def test_finds_immediate_win(self):
        game = get_game("connect3x3k3")
        s = game.initial_state()
        # First stacks column 0 twice; Second replies in column 1 twice.
        for col in (0, 1, 0, 1):
            s = game.apply(s, s.heights[col] * game.width + col)
        # First to move: dropping in column 0 wins on the spot.
        res = run_search(game, s, SearchConfig(mode=UCT, simulations=10000, seed=2))
        value, best = optimal_actions(game, s)
        assert value == 1
        assert res.action in best
        assert res.action == game.action_space.index(0, 2, 0)

    def test_puct_prefers_prior_mass_when_uninformed(self):
        game = get_game("connect3x3k3")
        s = game.initial_state()
        biased_action = game.legal_actions(s)[1]

        def biased(game_, state_):
            priors, _ = uniform_evaluator(game_, state_)
            priors *= 0.01
            priors[biased_action] += 1.0 - priors.sum()
            return priors, 0.0

        res = run_search(game, s, SearchConfig(mode=PUCT, simulations=50, seed=0),
                         evaluator=biased)
        assert res.action == biased_action

    def test_search_on_chance_game(self):
        game = get_game("ewn")
        s = game.chance_outcomes(game.initial_state())[0][1]
        res = run_search(game, s, SearchConfig(mode=UCT, simulations=300, seed=4))
        assert res.visits.sum() == 300
        assert res.action in game.legal_actions(s)
