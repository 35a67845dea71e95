"""Players (random, tree-search) and the evaluation arena that pits them.

Arena games are seeded per colour-swapped pair: games 2i and 2i+1 share one
rng stream with the players' colours exchanged, so a self-match produces
mirrored identical move sequences and results are reproducible end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Game, GameState, Player
from .mcts import Evaluator, SearchConfig, masked_softmax, run_search
from .nn.network import Network


class NetworkEvaluator:
    """Adapts a policy/value network to the search evaluator protocol."""

    def __init__(self, net: Network, temperature: float = 1.0):
        self.net = net
        self.temperature = temperature

    def __call__(self, game: Game, state: GameState) -> tuple[np.ndarray, float]:
        logits, value = self.net.predict(game.encode(state))
        priors = masked_softmax(logits.reshape(-1), game.legal_mask(state), self.temperature)
        return priors, value


class RandomAgent:
    """Uniform choice among legal actions."""

    name = "random"

    def select_action(self, game: Game, state: GameState, rng: np.random.Generator) -> int:
        acts = game.legal_actions(state)
        return acts[rng.integers(len(acts))]


class MctsAgent:
    """Tree-search player; samples visits for a few opening plies, then argmax.

    `opening_plies` > 0 keeps paired games from collapsing onto a single line
    when both players are deterministic; match play uses 0 for full strength.
    """

    def __init__(self, config: SearchConfig, evaluator: Evaluator | None = None,
                 opening_plies: int = 0, name: str = "mcts"):
        self.config = config
        self.evaluator = evaluator
        self.opening_plies = opening_plies
        self.name = name

    def select_action(self, game: Game, state: GameState, rng: np.random.Generator) -> int:
        result = run_search(game, state, self.config, evaluator=self.evaluator, rng=rng)
        if state.ply < self.opening_plies:
            return int(rng.choice(len(result.distribution), p=result.distribution))
        return result.action


def play_game(game: Game, agents: dict[Player, object], rng: np.random.Generator,
              move_cap: int | None = None) -> tuple[GameState, list[int]]:
    """One game between two agents; chance nodes are resolved with `rng`."""
    space = game.action_space
    cap = move_cap if move_cap is not None else 10 * space.height * space.width
    state = game.initial_state()
    history: list[int] = []
    while not state.status.is_terminal:
        if state.is_chance:
            outcomes = game.chance_outcomes(state)
            probs = [p for p, _ in outcomes]
            state = outcomes[rng.choice(len(outcomes), p=probs)][1]
            continue
        if len(history) >= cap:
            break
        action = agents[state.player_to_move].select_action(game, state, rng)
        state = game.apply(state, action)
        history.append(action)
    return state, history


@dataclass
class ArenaResult:
    games: int
    wins_a: int
    wins_b: int
    draws: int
    histories: list[list[int]] = field(repr=False, default_factory=list)

    @property
    def score_a(self) -> float:
        return (self.wins_a + 0.5 * self.draws) / self.games if self.games else 0.5

    @property
    def elo_delta(self) -> float:
        """Logistic rating-difference point estimate of A over B."""
        s = self.score_a
        if s <= 0.0:
            return -math.inf
        if s >= 1.0:
            return math.inf
        return 400.0 * math.log10(s / (1.0 - s))

    def summary(self) -> str:
        return (f"A wins {self.wins_a}, B wins {self.wins_b}, draws {self.draws} "
                f"({self.games} games, score {self.score_a:.3f}, "
                f"elo delta {self.elo_delta:+.1f})")


def arena(game: Game, agent_a, agent_b, num_games: int, seed: int = 0,
          keep_histories: bool = False) -> ArenaResult:
    """Play `num_games` with colours alternating each game, fixed seeds per pair."""
    wins_a = wins_b = draws = 0
    histories: list[list[int]] = []
    for g in range(num_games):
        rng = np.random.default_rng([seed, g // 2])
        a_plays_first = g % 2 == 0
        agents = {
            Player.FIRST: agent_a if a_plays_first else agent_b,
            Player.SECOND: agent_b if a_plays_first else agent_a,
        }
        final, history = play_game(game, agents, rng)
        if keep_histories:
            histories.append(history)
        if not final.status.is_terminal or final.status.kind == "draw":
            draws += 1
        elif (final.status.winner == Player.FIRST) == a_plays_first:
            wins_a += 1
        else:
            wins_b += 1
    return ArenaResult(num_games, wins_a, wins_b, draws, histories)
