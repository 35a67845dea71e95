"""Self-play data generation and the replay-buffer training loop.

Workers play games between the current network ("dev") and opponents picked
from the ELO pool, producing one training sample per decision state: the
encoded position, the search visit distribution, and the final reward from
the mover's point of view. The trainer draws uniform batches from a cyclic
buffer in which no slot may be consumed more than eight times between
overwrites; when everything eligible is exhausted it waits for fresh games
instead of stretching stale data further.
"""

from __future__ import annotations

import hashlib
import logging
import struct
import threading
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import BinaryIO, Iterator

import numpy as np

from .arena import NetworkEvaluator
from .core import Game, Player
from .games import get_game
from .mcts import PUCT, SearchConfig, run_search
from .nn import Checkpoint, Network, NetworkSpec, loss_and_gradients, save_checkpoint, sgd_step
from .tournament import DRAW, EloPool, LOSS, WIN

log = logging.getLogger(__name__)

MAX_SAMPLE_REUSE = 8


@dataclass
class Sample:
    """One training example: encoded state, visit distribution, final reward.

    The legality mask is carried along so the loss can renormalise over the
    actions that were actually available, not just the visited ones.
    """

    encoded: np.ndarray        # (3, H, W) float32
    visit_probs: np.ndarray    # flat action-space distribution, float32
    legal_mask: np.ndarray     # flat bools
    reward: float              # mover's final outcome in {-1, 0, +1}


class BufferStarved(Exception):
    """Not enough re-usable samples for a batch; the caller should wait."""


class ReplayBuffer:
    """Fixed-capacity cyclic store with a per-slot reuse cap.

    Pushes overwrite strictly oldest-first (cursor order). Sampling picks
    uniformly, without replacement, among slots whose reuse counter is still
    under the cap, and bumps the counter of every slot it returns.
    """

    def __init__(self, capacity: int, max_reuse: int = MAX_SAMPLE_REUSE):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.max_reuse = max_reuse
        self._slots: list[Sample | None] = [None] * capacity
        self._reuse = np.zeros(capacity, dtype=np.int32)
        self._cursor = 0
        self.total_pushed = 0
        self.total_sampled = 0
        self.max_reuse_seen = 0
        self.overwrite_order: list[int] = []
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return min(self.total_pushed, self.capacity)

    def push(self, sample: Sample) -> int:
        with self._lock:
            slot = self._cursor
            if self._slots[slot] is not None:
                self.overwrite_order.append(slot)
            self._slots[slot] = sample
            self._reuse[slot] = 0
            self._cursor = (self._cursor + 1) % self.capacity
            self.total_pushed += 1
            return slot

    def eligible_count(self) -> int:
        with self._lock:
            return self._eligible().size

    def _eligible(self) -> np.ndarray:
        filled = min(self.total_pushed, self.capacity)
        return np.flatnonzero(self._reuse[:filled] < self.max_reuse)

    def sample_batch(self, batch_size: int, rng: np.random.Generator) -> list[Sample]:
        with self._lock:
            eligible = self._eligible()
            if eligible.size < batch_size:
                raise BufferStarved(
                    f"{eligible.size} reusable samples available, need {batch_size}")
            chosen = rng.choice(eligible, size=batch_size, replace=False)
            self._reuse[chosen] += 1
            self.max_reuse_seen = max(self.max_reuse_seen, int(self._reuse[chosen].max()))
            self.total_sampled += batch_size
            return [self._slots[i] for i in chosen]


@dataclass
class TrainLoopConfig:
    """Knobs for one training run; file form is flat `key=value` lines."""

    game: str = "connect4x4k3"
    batch_size: int = 256
    learning_rate: float = 0.01
    weight_decay: float = 1e-4
    checkpoint_interval: int = 100      # steps between emitted checkpoints
    buffer_capacity: int = 100_000
    sims_per_move: int = 600
    workers: int = 1
    seed: int = 0
    # network architecture
    trunk_channels: int = 16
    residual_blocks: int = 2
    kernel_size: int = 3
    value_pool_channels: int = 4
    value_hidden: int = 32
    # self-play behaviour
    pool_game_fraction: float = 0.5     # share of games drawn against pool members
    temperature_plies: int = 8          # sample visits this long, then argmax
    dirichlet_alpha: float = 0.3
    dirichlet_epsilon: float = 0.25

    def __post_init__(self):
        for f in ("batch_size", "learning_rate", "weight_decay", "checkpoint_interval",
                  "buffer_capacity", "sims_per_move"):
            if getattr(self, f) <= 0:
                raise ValueError(f"{f} must be positive")
        if self.workers < 0:
            raise ValueError("workers must be >= 0")

    def network_spec(self, game: Game) -> NetworkSpec:
        return NetworkSpec(
            input_channels=3,
            trunk_channels=self.trunk_channels,
            residual_blocks=self.residual_blocks,
            kernel_size=self.kernel_size,
            policy_channels=game.action_space.channels,
            value_pool_channels=self.value_pool_channels,
            value_hidden=self.value_hidden,
        )

    def search_config(self, seed: int = 0) -> SearchConfig:
        return SearchConfig(mode=PUCT, simulations=self.sims_per_move,
                            dirichlet_alpha=self.dirichlet_alpha,
                            dirichlet_epsilon=self.dirichlet_epsilon, seed=seed)


def parse_config(text: str) -> TrainLoopConfig:
    """Parse the flat key=value config format; `#` starts a comment."""
    known = {f.name: f.type for f in fields(TrainLoopConfig)}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key == "game":
            values[key] = value
        elif known[key] == "int" or known[key] is int:
            values[key] = int(value)
        else:
            values[key] = float(value)
    return TrainLoopConfig(**values)


def format_config(config: TrainLoopConfig) -> str:
    return "\n".join(f"{f.name}={getattr(config, f.name)}" for f in fields(config)) + "\n"


def self_play_game(
    game: Game,
    dev_evaluator,
    config: TrainLoopConfig,
    rng: np.random.Generator,
    opponent_evaluator=None,
    dev_player: Player = Player.FIRST,
) -> tuple[list[Sample], str]:
    """Play one game and return (samples, result for dev in {win,loss,draw}).

    With an opponent, only dev's own decisions are recorded: the opponent's
    searches come from an older network and would teach the wrong targets.
    Games hitting the safety cap of 10x the board area are abandoned.
    """
    search = config.search_config()
    move_cap = 10 * game.action_space.height * game.action_space.width
    state = game.initial_state()
    records = []  # (encoded, distribution, legal_mask, mover)
    moves = 0
    while not state.status.is_terminal:
        if state.is_chance:
            outcomes = game.chance_outcomes(state)
            probs = [p for p, _ in outcomes]
            state = outcomes[rng.choice(len(outcomes), p=probs)][1]
            continue
        if moves >= move_cap:
            log.warning("abandoning %s game after %d moves", game.id, moves)
            return [], DRAW
        mover = state.player_to_move
        dev_turn = opponent_evaluator is None or mover == dev_player
        evaluator = dev_evaluator if dev_turn else opponent_evaluator
        result = run_search(game, state, search, evaluator=evaluator, rng=rng,
                            root_noise=True)
        if dev_turn:
            records.append((game.encode(state), result.distribution.astype(np.float32),
                            game.legal_mask(state), mover))
        if state.ply < config.temperature_plies:
            action = int(rng.choice(len(result.distribution), p=result.distribution))
        else:
            action = result.action
        state = game.apply(state, action)
        moves += 1
    reward_first = game.outcome(state, Player.FIRST)
    samples = [
        Sample(encoded, dist, legal, float(reward_first if mover == Player.FIRST
                                           else -reward_first))
        for encoded, dist, legal, mover in records
    ]
    dev_outcome = game.outcome(state, dev_player)
    result_name = WIN if dev_outcome > 0 else LOSS if dev_outcome < 0 else DRAW
    return samples, result_name


def batch_arrays(batch: list[Sample]):
    states = np.stack([s.encoded for s in batch])
    policies = np.stack([s.visit_probs for s in batch]).astype(np.float64)
    masks = np.stack([s.legal_mask for s in batch])
    rewards = np.array([s.reward for s in batch], dtype=np.float64)
    return states, policies, masks, rewards


class TrainLoop:
    """Owns the buffer, the dev network, the pool, and checkpoint emission.

    `workers <= 1` runs everything on the calling thread, interleaving one
    self-play game with as many training steps as the reuse cap allows; this
    path is deterministic for a fixed seed. `workers >= 2` starts that many
    self-play threads that feed the buffer while the trainer thread consumes
    it, backing off exponentially (10 ms up to 1 s) whenever it starves.
    """

    def __init__(self, config: TrainLoopConfig, out_dir: str | Path,
                 net: Network | None = None):
        self.config = config
        self.game = get_game(config.game)
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        rng = np.random.default_rng([config.seed, 0xC0FFEE])
        self.net = net or Network.initialize(config.network_spec(self.game), rng)
        self.buffer = ReplayBuffer(config.buffer_capacity)
        self.pool = EloPool()
        self.step = 0
        self.games_played = 0
        self.checkpoint_paths: list[Path] = []
        self.losses: list[float] = []
        self._published = self.net.copy()
        self._opponents: dict[str, Network] = {}
        self._stop = threading.Event()
        self._publish_lock = threading.Lock()
        self._count_lock = threading.Lock()

    # -- shared helpers ----------------------------------------------------

    def _published_net(self) -> Network:
        with self._publish_lock:
            return self._published

    def _publish(self) -> None:
        with self._publish_lock:
            self._published = self.net.copy()

    def _checkpoint_path(self, step: int) -> Path:
        return self.out_dir / f"ckpt_{step:06d}.ckpt"

    def emit_checkpoint(self) -> Path:
        path = self._checkpoint_path(self.step)
        ckpt = Checkpoint.of(self.net, self.game.id, self.step, elo=self.pool.dev_rating)
        save_checkpoint(ckpt, path)
        self.checkpoint_paths.append(path)
        self.pool.admit(path.name)
        self._opponents[path.name] = self.net.copy()
        self.pool.save(self.out_dir / "pool.txt")
        self._publish()
        return path

    def _play_one_game(self, rng: np.random.Generator) -> list[Sample]:
        dev_net = self._published_net()
        dev_eval = NetworkEvaluator(dev_net)
        opponent = None
        if rng.random() < self.config.pool_game_fraction:
            opponent = self.pool.select_opponent(rng)
        with self._count_lock:
            game_index = self.games_played
            self.games_played += 1
        dev_player = Player.FIRST if game_index % 2 == 0 else Player.SECOND
        opp_net = self._opponents.get(opponent.checkpoint_id) if opponent else None
        if opp_net is None:
            samples, _ = self_play_game(self.game, dev_eval, self.config, rng)
        else:
            samples, result = self_play_game(self.game, dev_eval, self.config, rng,
                                             opponent_evaluator=NetworkEvaluator(opp_net),
                                             dev_player=dev_player)
            self.pool.record_result(opponent.checkpoint_id, result)
        for s in samples:
            self.buffer.push(s)
        return samples

    def _train_step(self, rng: np.random.Generator) -> float:
        batch = self.buffer.sample_batch(self.config.batch_size, rng)
        states, policies, masks, rewards = batch_arrays(batch)
        loss, _, grads = loss_and_gradients(self.net, states, policies, masks, rewards,
                                            self.config.weight_decay)
        sgd_step(self.net, grads, self.config.learning_rate)
        self.step += 1
        self.losses.append(loss)
        if self.step % self.config.checkpoint_interval == 0:
            self.emit_checkpoint()
        return loss

    # -- synchronous single-worker path -------------------------------------

    def run_synchronous(self, max_games: int, max_steps: int | None = None) -> list[Path]:
        """Deterministic interleaved loop: one game, then train until starved."""
        game_rng = np.random.default_rng([self.config.seed, 1])
        train_rng = np.random.default_rng([self.config.seed, 2])
        self.emit_checkpoint()  # step-0 baseline
        while self.games_played < max_games and (max_steps is None or self.step < max_steps):
            self._play_one_game(game_rng)
            while max_steps is None or self.step < max_steps:
                try:
                    self._train_step(train_rng)
                except BufferStarved:
                    break
        return self.checkpoint_paths

    # -- threaded path -------------------------------------------------------

    def run_threaded(self, max_games: int, max_steps: int | None = None) -> list[Path]:
        self.emit_checkpoint()
        threads = []
        for w in range(self.config.workers):
            t = threading.Thread(target=self._worker_main, args=(w, max_games),
                                 name=f"selfplay-{w}", daemon=True)
            t.start()
            threads.append(t)
        backoff = 0.01
        while not self._stop.is_set():
            if max_steps is not None and self.step >= max_steps:
                break
            if self.games_played >= max_games and self.buffer.eligible_count() < self.config.batch_size:
                break
            try:
                self._train_step(np.random.default_rng([self.config.seed, 2, self.step]))
                backoff = 0.01
            except BufferStarved:
                if self.games_played >= max_games:
                    break
                time.sleep(backoff)
                backoff = min(backoff * 2, 1.0)  # wait for data, never over-reuse it
        self._stop.set()
        for t in threads:
            t.join(timeout=30)
        return self.checkpoint_paths

    def _worker_main(self, worker_id: int, max_games: int) -> None:
        game_index = worker_id
        while not self._stop.is_set() and self.games_played < max_games:
            rng = np.random.default_rng([self.config.seed, 1, worker_id, game_index])
            game_index += self.config.workers
            try:
                self._play_one_game(rng)
            except Exception:
                log.exception("self-play worker %d crashed; respawning game", worker_id)

    def run(self, max_games: int, max_steps: int | None = None) -> list[Path]:
        if self.config.workers <= 1:
            return self.run_synchronous(max_games, max_steps)
        return self.run_threaded(max_games, max_steps)


# -- worker -> trainer wire format -------------------------------------------
#
# Each record:
#   u32  payload length (bytes after this field)
#   u16  game id length + utf-8 game id
#   u64  network spec hash (see spec_hash)
#   u32  sample count
#   per sample:
#     u16 u16 u16   encoded planes shape (C, H, W), then float32 data
#     u32           flat action count A, then float32 visit distribution
#     A bytes       legality mask (0/1 per action)
#     f32           reward

def spec_hash(spec: NetworkSpec) -> int:
    text = repr(spec).encode()
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "little")


def encode_sample_record(game_id: str, net_spec: NetworkSpec, samples: list[Sample]) -> bytes:
    gid = game_id.encode("utf-8")
    parts = [struct.pack("<H", len(gid)), gid,
             struct.pack("<Q", spec_hash(net_spec)),
             struct.pack("<I", len(samples))]
    for s in samples:
        c, h, w = s.encoded.shape
        parts.append(struct.pack("<HHH", c, h, w))
        parts.append(np.ascontiguousarray(s.encoded, dtype="<f4").tobytes())
        parts.append(struct.pack("<I", s.visit_probs.size))
        parts.append(np.ascontiguousarray(s.visit_probs, dtype="<f4").tobytes())
        parts.append(np.ascontiguousarray(s.legal_mask, dtype=np.uint8).tobytes())
        parts.append(struct.pack("<f", s.reward))
    payload = b"".join(parts)
    return struct.pack("<I", len(payload)) + payload


def decode_sample_records(stream: BinaryIO) -> Iterator[tuple[str, int, list[Sample]]]:
    """Yield (game id, spec hash, samples) records until the stream ends."""
    while True:
        header = stream.read(4)
        if not header:
            return
        if len(header) < 4:
            raise ValueError("record stream truncated in length prefix")
        (length,) = struct.unpack("<I", header)
        payload = stream.read(length)
        if len(payload) < length:
            raise ValueError("record stream truncated mid-record")
        yield _decode_payload(payload)


def _decode_payload(payload: bytes) -> tuple[str, int, list[Sample]]:
    off = 0
    (gid_len,) = struct.unpack_from("<H", payload, off)
    off += 2
    game_id = payload[off:off + gid_len].decode("utf-8")
    off += gid_len
    (shash,) = struct.unpack_from("<Q", payload, off)
    off += 8
    (count,) = struct.unpack_from("<I", payload, off)
    off += 4
    samples = []
    for _ in range(count):
        c, h, w = struct.unpack_from("<HHH", payload, off)
        off += 6
        n = c * h * w
        encoded = np.frombuffer(payload, dtype="<f4", count=n, offset=off).reshape(c, h, w).copy()
        off += 4 * n
        (a,) = struct.unpack_from("<I", payload, off)
        off += 4
        probs = np.frombuffer(payload, dtype="<f4", count=a, offset=off).copy()
        off += 4 * a
        mask = np.frombuffer(payload, dtype=np.uint8, count=a, offset=off).astype(bool)
        off += a
        (reward,) = struct.unpack_from("<f", payload, off)
        off += 4
        samples.append(Sample(encoded, probs, mask, float(reward)))
    if off != len(payload):
        raise ValueError(f"{len(payload) - off} unparsed bytes in record")
    return game_id, shash, samples
