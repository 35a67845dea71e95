"""Tree search over game states: bandit-style selection with random rollouts,
or prior-guided selection with network value truncation, plus chance nodes.

Simulation accounting: the root is expanded before the budget is spent (in
prior-guided mode this costs one network evaluation whose value is backed up
into the root alone), after which every one of the `simulations` descents
passes through exactly one root child. Root child visit counts therefore sum
to exactly the simulation budget in both modes, and every non-root node
satisfies num_sims == 1 + sum of its children's num_sims.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .core import ChanceNodeError, Game, GameState, NotTerminalError, Player

UCT = "uct"
PUCT = "puct"


class Evaluator(Protocol):
    """Maps a decision state to (prior distribution over the action space, value).

    The prior must be a flat float array of length game.action_space.total,
    zero on illegal actions and summing to one; the value is the expected
    outcome in [-1, 1] for the player to move.
    """

    def __call__(self, game: Game, state: GameState) -> tuple[np.ndarray, float]:
        ...


def uniform_evaluator(game: Game, state: GameState) -> tuple[np.ndarray, float]:
    """Uniform priors over legal actions, value 0. Baseline and test double."""
    acts = game.legal_actions(state)
    priors = np.zeros(game.action_space.total)
    priors[np.asarray(acts)] = 1.0 / len(acts)
    return priors, 0.0


@dataclass
class SearchConfig:
    mode: str = PUCT
    simulations: int = 600
    exploration: float = 1.0  # bandit constant, selection bonus weight in uct mode
    temperature: float = 1.0  # multiplies logits before the masked softmax
    dirichlet_alpha: float = 0.3
    dirichlet_epsilon: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (UCT, PUCT):
            raise ValueError(f"unknown search mode {self.mode!r}")
        if self.simulations < 1:
            raise ValueError("simulations must be >= 1")
        if self.exploration < 0:
            raise ValueError("exploration must be >= 0")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if not 0.0 <= self.dirichlet_epsilon <= 1.0:
            raise ValueError("dirichlet_epsilon must be in [0, 1]")


def masked_softmax(logits: np.ndarray, legal: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Probabilities proportional to exp(temperature * logit) on legal entries.

    Illegal entries are exactly zero. The maximum legal logit is subtracted
    before exponentiation so large logits cannot overflow.
    """
    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    legal = np.asarray(legal, dtype=bool)
    if not legal.any():
        raise ValueError("mask has no legal entries")
    z = temperature * np.asarray(logits, dtype=np.float64)
    z = np.where(legal, z, -np.inf)
    z -= z.max()
    p = np.exp(z, where=legal, out=np.zeros_like(z))
    return p / p.sum()


def add_dirichlet_noise(
    priors: np.ndarray,
    legal: np.ndarray,
    alpha: float,
    epsilon: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """(1 - eps) * priors + eps * Dirichlet(alpha), sampled over legal entries only."""
    if epsilon == 0.0:
        return priors
    legal = np.asarray(legal, dtype=bool)
    noise = np.zeros_like(priors)
    noise[legal] = rng.dirichlet([alpha] * int(legal.sum()))
    return (1.0 - epsilon) * priors + epsilon * noise


class SearchNode:
    """Per-state statistics: visits, accumulated reward, prior, children.

    `total_reward` accumulates from the fixed `perspective` player's point of
    view; the perspective of a decision node's child is the player who moved
    into it, and chance edges keep the parent's perspective.
    """

    __slots__ = ("state", "perspective", "prior", "num_sims", "total_reward",
                 "children", "outcomes")

    def __init__(self, state: GameState | None, perspective: Player, prior: float = 0.0):
        self.state = state
        self.perspective = perspective
        self.prior = prior
        self.num_sims = 0
        self.total_reward = 0.0
        self.children: dict[int, SearchNode] | None = None
        self.outcomes: list[tuple[float, "SearchNode"]] | None = None

    @property
    def avg_reward(self) -> float:
        return self.total_reward / self.num_sims if self.num_sims > 0 else 0.0

    @property
    def expanded(self) -> bool:
        return self.children is not None or self.outcomes is not None


def uct_score(child: SearchNode, parent_sims: int, exploration: float) -> float:
    """Average reward plus the bandit exploration bonus; unvisited children win ties at +inf."""
    if child.num_sims == 0:
        return math.inf
    return child.avg_reward + exploration * math.sqrt(math.log(parent_sims) / child.num_sims)


def puct_score(child: SearchNode, parent_sims: int) -> float:
    """Average reward plus prior * sqrt(parent) / (1 + child visits); fresh children score from 0."""
    return child.avg_reward + child.prior * math.sqrt(parent_sims) / (1 + child.num_sims)


def chance_step(node: SearchNode, rng: np.random.Generator) -> SearchNode:
    """Sample one outcome child of a chance node according to its probability."""
    if node.outcomes is None:
        raise ChanceNodeError("node is not an expanded chance node")
    u = rng.random()
    acc = 0.0
    for prob, child in node.outcomes:
        acc += prob
        if u < acc:
            return child
    return node.outcomes[-1][1]


@dataclass
class SearchResult:
    distribution: np.ndarray  # visit proportions over the flat action space
    visits: np.ndarray
    action: int
    value: float  # root average reward, mover's point of view
    root: SearchNode = field(repr=False)


def run_search(
    game: Game,
    root_state: GameState,
    config: SearchConfig,
    evaluator: Evaluator | None = None,
    rng: np.random.Generator | None = None,
    root_noise: bool = False,
) -> SearchResult:
    """Run the configured number of simulations and pick the most-visited move.

    Ties (selection and final choice) break towards the lowest action index
    so results are reproducible for a fixed seed.
    """
    if root_state.status.is_terminal:
        raise NotTerminalError("cannot search a terminal state")
    if root_state.is_chance:
        raise ChanceNodeError("search must start at a decision node")
    if config.mode == PUCT and evaluator is None:
        raise ValueError("prior-guided search needs an evaluator")
    if rng is None:
        rng = np.random.default_rng(config.seed)

    root = SearchNode(root_state, root_state.player_to_move)
    if config.mode == PUCT:
        priors, value = evaluator(game, root_state)
        _expand_decision(game, root, priors)
        _backup([root], value, root_state.player_to_move)
    else:
        _expand_decision(game, root, None)
    if root_noise and config.mode == PUCT:
        _apply_root_noise(game, root, config, rng)

    for _ in range(config.simulations):
        _simulate(game, root, config, evaluator, rng)

    space = game.action_space
    visits = np.zeros(space.total, dtype=np.int64)
    for action, child in root.children.items():
        visits[action] = child.num_sims
    total = int(visits.sum())
    assert total == config.simulations, "root children must account for every simulation"
    distribution = visits.astype(np.float64) / total
    action = int(np.argmax(visits))
    return SearchResult(distribution, visits, action, root.avg_reward, root)


def _expand_decision(game: Game, node: SearchNode, priors: np.ndarray | None) -> None:
    mover = node.state.player_to_move
    acts = game.legal_actions(node.state)
    node.children = {
        a: SearchNode(None, mover, float(priors[a]) if priors is not None else 0.0)
        for a in acts
    }


def _expand_chance(game: Game, node: SearchNode) -> None:
    node.outcomes = [
        (prob, SearchNode(succ, node.perspective))
        for prob, succ in game.chance_outcomes(node.state)
    ]


def _apply_root_noise(game: Game, root: SearchNode, config: SearchConfig, rng) -> None:
    legal = sorted(root.children)
    priors = np.array([root.children[a].prior for a in legal])
    mask = np.ones(len(legal), dtype=bool)
    noisy = add_dirichlet_noise(priors, mask, config.dirichlet_alpha,
                                config.dirichlet_epsilon, rng)
    for a, p in zip(legal, noisy):
        root.children[a].prior = float(p)


def _select_child(node: SearchNode, config: SearchConfig) -> tuple[int, SearchNode]:
    best_action, best_score = -1, -math.inf
    for action in sorted(node.children):
        child = node.children[action]
        if config.mode == UCT:
            score = uct_score(child, node.num_sims, config.exploration)
        else:
            score = puct_score(child, node.num_sims)
        if score > best_score:
            best_action, best_score = action, score
    return best_action, node.children[best_action]


def _simulate(game, root, config, evaluator, rng) -> None:
    node = root
    path = [root]
    while True:
        state = node.state
        if state.status.is_terminal:
            value = game.outcome(state, node.perspective)
            value_perspective = node.perspective
            break
        if state.is_chance:
            if node.outcomes is None:
                _expand_chance(game, node)
            node = chance_step(node, rng)
            path.append(node)
            continue
        if node.children is None:
            mover = state.player_to_move
            if config.mode == PUCT:
                priors, value = evaluator(game, state)
                _expand_decision(game, node, priors)
            else:
                _expand_decision(game, node, None)
                value = _rollout(game, state, rng, mover)
            value_perspective = mover
            break
        action, child = _select_child(node, config)
        if child.state is None:
            child.state = game.apply(state, action)
        path.append(child)
        node = child
    _backup(path, value, value_perspective)


def _rollout(game: Game, state: GameState, rng: np.random.Generator, perspective: Player) -> int:
    """Uniform-random playout to the end of the game."""
    while not state.status.is_terminal:
        if state.is_chance:
            outcomes = game.chance_outcomes(state)
            u = rng.random()
            acc = 0.0
            state = outcomes[-1][1]
            for prob, succ in outcomes:
                acc += prob
                if u < acc:
                    state = succ
                    break
        else:
            acts = game.legal_actions(state)
            state = game.apply(state, acts[rng.integers(len(acts))])
    return game.outcome(state, perspective)


def _backup(path: list[SearchNode], value: float, value_perspective: Player) -> None:
    for node in path:
        node.num_sims += 1
        node.total_reward += value if node.perspective == value_perspective else -value
