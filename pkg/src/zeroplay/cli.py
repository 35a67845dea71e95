"""Command-line entry points: train, selfplay, eval, convert, play, serve.

Exit codes: 0 success, 1 usage problems, 2 data or format problems.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_DATA):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we reserve that
        self.print_usage(sys.stderr)
        raise CliError(message, EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zeroplay", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("train", help="run the self-play training loop")
    p.add_argument("config", help="flat key=value config file")
    p.add_argument("--out", default="runs/latest", help="checkpoint output directory")
    p.add_argument("--games", type=int, default=200, help="self-play games to generate")
    p.add_argument("--steps", type=int, default=None, help="optional hard step limit")
    p.add_argument("--resume", default=None, metavar="CKPT",
                   help="resume from a checkpoint (same game family; board size may differ)")

    p = sub.add_parser("selfplay", help="generate self-play sample records from a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("--games", type=int, default=10)
    p.add_argument("--sims", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="record file, '-' for stdout")

    p = sub.add_parser("eval", help="arena: play two checkpoints against each other")
    p.add_argument("checkpoint_a")
    p.add_argument("checkpoint_b")
    p.add_argument("-n", "--games", type=int, default=20)
    p.add_argument("--sims", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("convert", help="grow a checkpoint, preserving its outputs")
    p.add_argument("checkpoint")
    p.add_argument("-o", "--out", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--add-block", action="store_true")
    group.add_argument("--add-channels", type=int, metavar="X")
    group.add_argument("--grow-kernel", type=int, metavar="K")
    p.add_argument("--group", default="trunk", choices=("trunk", "value_hidden"),
                   help="which channel group --add-channels widens")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("play", help="play against a checkpoint in the terminal")
    p.add_argument("checkpoint")
    p.add_argument("--game", default=None, help="game id, defaults to the checkpoint's")
    p.add_argument("--human", default="first", choices=("first", "second"))
    p.add_argument("--sims", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replay", default=None, help="move-history file to replay first")

    p = sub.add_parser("serve", help="serve the HTTP match API")
    p.add_argument("checkpoint")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--sims", type=int, default=64)
    p.add_argument("--match-dir", default="matches")
    p.add_argument("--frontend", default=None, help="static UI directory to mount at /")
    return parser


def _load_checkpoint(path: str):
    from .nn import CheckpointError, load_checkpoint
    try:
        return load_checkpoint(path)
    except FileNotFoundError as exc:
        raise CliError(f"checkpoint not found: {exc}", EXIT_DATA)
    except CheckpointError as exc:
        raise CliError(f"bad checkpoint: {exc}", EXIT_DATA)


def cmd_train(args) -> int:
    from .training import TrainLoop, parse_config
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}", EXIT_DATA)
    try:
        config = parse_config(text)
    except ValueError as exc:
        raise CliError(f"bad config: {exc}", EXIT_DATA)
    net, start_step = None, 0
    if args.resume:
        from .games import game_family, get_game
        ckpt = _load_checkpoint(args.resume)
        if game_family(ckpt.game_id) != game_family(config.game):
            raise CliError(f"checkpoint {ckpt.game_id} cannot resume a "
                           f"{config.game} run", EXIT_DATA)
        if ckpt.spec.policy_channels != get_game(config.game).action_space.channels:
            raise CliError("checkpoint policy channels do not fit this game", EXIT_DATA)
        net, start_step = ckpt.network(), ckpt.step
    loop = TrainLoop(config, args.out, net=net)
    loop.step = start_step
    print(f"training {config.game}: {args.games} games, workers={config.workers}, "
          f"out={args.out}" + (f", resumed at step {start_step}" if args.resume else ""))
    paths = loop.run(max_games=args.games, max_steps=args.steps)
    print(f"finished at step {loop.step} after {loop.games_played} games; "
          f"{len(paths)} checkpoints")
    for p in paths[-3:]:
        print(f"  {p}")
    return EXIT_OK


def cmd_selfplay(args) -> int:
    from .arena import NetworkEvaluator
    from .games import get_game
    from .training import TrainLoopConfig, encode_sample_record, self_play_game
    ckpt = _load_checkpoint(args.checkpoint)
    game = get_game(ckpt.game_id)
    config = TrainLoopConfig(game=ckpt.game_id, sims_per_move=args.sims,
                             trunk_channels=ckpt.spec.trunk_channels,
                             residual_blocks=ckpt.spec.residual_blocks,
                             kernel_size=ckpt.spec.kernel_size,
                             value_pool_channels=ckpt.spec.value_pool_channels,
                             value_hidden=ckpt.spec.value_hidden)
    evaluator = NetworkEvaluator(ckpt.network())
    out = sys.stdout.buffer if args.out == "-" else open(args.out, "wb")
    try:
        total = 0
        for g in range(args.games):
            rng = np.random.default_rng([args.seed, g])
            samples, _ = self_play_game(game, evaluator, config, rng)
            out.write(encode_sample_record(game.id, ckpt.spec, samples))
            total += len(samples)
        print(f"wrote {total} samples from {args.games} games", file=sys.stderr)
    finally:
        if out is not sys.stdout.buffer:
            out.close()
    return EXIT_OK


def cmd_eval(args) -> int:
    from .arena import MctsAgent, NetworkEvaluator, arena
    from .games import get_game
    from .mcts import PUCT, SearchConfig
    ckpt_a = _load_checkpoint(args.checkpoint_a)
    ckpt_b = _load_checkpoint(args.checkpoint_b)
    if ckpt_a.game_id != ckpt_b.game_id:
        raise CliError(f"game mismatch: {ckpt_a.game_id} vs {ckpt_b.game_id}", EXIT_DATA)
    game = get_game(ckpt_a.game_id)
    config = SearchConfig(mode=PUCT, simulations=args.sims, dirichlet_epsilon=0.0)
    agent_a = MctsAgent(config, NetworkEvaluator(ckpt_a.network()), opening_plies=4, name="A")
    agent_b = MctsAgent(config, NetworkEvaluator(ckpt_b.network()), opening_plies=4, name="B")
    result = arena(game, agent_a, agent_b, args.games, seed=args.seed)
    print(f"{game.id}: {result.summary()}")
    return EXIT_OK


def cmd_convert(args) -> int:
    from .nn import Checkpoint, grow_add_block, grow_add_channels, grow_kernel, save_checkpoint
    ckpt = _load_checkpoint(args.checkpoint)
    net = ckpt.network()
    if args.add_block:
        net = grow_add_block(net, np.random.default_rng(args.seed))
        what = "added one residual block"
    elif args.add_channels is not None:
        try:
            net = grow_add_channels(net, args.add_channels, group=args.group)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_USAGE)
        what = f"added {args.add_channels} channels to {args.group}"
    else:
        try:
            net = grow_kernel(net, args.grow_kernel)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_USAGE)
        what = f"grew kernels to {args.grow_kernel}x{args.grow_kernel}"
    save_checkpoint(Checkpoint.of(net, ckpt.game_id, ckpt.step, ckpt.elo), args.out)
    print(f"{what}; wrote {args.out}")
    return EXIT_OK


def cmd_play(args) -> int:
    from .arena import NetworkEvaluator
    from .core import IllegalActionError, Player, parse_move_history
    from .games import get_game
    from .mcts import PUCT, SearchConfig, run_search
    ckpt = _load_checkpoint(args.checkpoint)
    game_id = args.game or ckpt.game_id
    from .games import game_family
    if game_family(game_id) != game_family(ckpt.game_id):
        raise CliError(f"checkpoint {ckpt.game_id} cannot play {game_id}", EXIT_DATA)
    game = get_game(game_id)
    evaluator = NetworkEvaluator(ckpt.network())
    config = SearchConfig(mode=PUCT, simulations=args.sims, dirichlet_epsilon=0.0)
    human = Player.FIRST if args.human == "first" else Player.SECOND
    state = game.initial_state()
    rng = np.random.default_rng(args.seed)
    if args.replay:
        for action in parse_move_history(game.action_space, Path(args.replay).read_text()):
            state = game.apply(state, action)
    print(game.render(state))
    while not state.status.is_terminal:
        if state.is_chance:
            outcomes = game.chance_outcomes(state)
            state = outcomes[rng.choice(len(outcomes), p=[p for p, _ in outcomes])][1]
            print(game.render(state))
            continue
        if state.player_to_move == human:
            line = input("your move (row col | swap | ch,row,col | quit): ").strip()
            if line in ("quit", "exit", "q"):
                return EXIT_OK
            try:
                if line == "swap":
                    action = game.swap_action
                elif "," in line:
                    ch, r, c = (int(x) for x in line.split(","))
                    action = game.action_space.index(ch, r, c)
                else:
                    r, c = (int(x) for x in line.split())
                    action = game.action_space.index(0, r, c)
                state = game.apply(state, action)
            except (ValueError, IndexError, AttributeError, IllegalActionError) as exc:
                print(f"  rejected: {exc}")
                continue
        else:
            result = run_search(game, state, config, evaluator=evaluator, rng=rng)
            ch, r, c = game.action_space.unravel(result.action)
            print(f"engine plays {ch},{r},{c} (value {result.value:+.2f})")
            state = game.apply(state, result.action)
        print(game.render(state))
    winner = state.status.winner
    if winner is None:
        print("draw")
    else:
        print("you win!" if winner == human else "engine wins")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn
    from .server import create_app
    _load_checkpoint(args.checkpoint)  # fail fast with exit code 2 on a bad file
    app = create_app(args.checkpoint, match_dir=args.match_dir,
                     default_sims=args.sims, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


_COMMANDS = {
    "train": cmd_train,
    "selfplay": cmd_selfplay,
    "eval": cmd_eval,
    "convert": cmd_convert,
    "play": cmd_play,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.verb](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except KeyboardInterrupt:
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
