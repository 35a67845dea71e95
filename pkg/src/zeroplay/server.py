"""HTTP JSON service for live matches against an engine checkpoint.

Engine searches run off the request path: a move submission returns at once
with `engine_thinking` set, and clients poll `GET /matches/{id}` until the
reply lands. Move submissions are idempotent per ply, so a retried request
returns the stored result instead of applying a second move.
"""

from __future__ import annotations

import logging
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .arena import NetworkEvaluator
from .core import Game, GameState, IllegalActionError, Player, format_move_history
from .games import EXAMPLE_IDS, GAME_FAMILIES, ConnectState, EwnState, HavannahState, HexState
from .games import game_family, get_game
from .mcts import PUCT, UCT, SearchConfig, run_search
from .nn import load_checkpoint

log = logging.getLogger(__name__)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


@dataclass
class Match:
    id: str
    game: Game
    state: GameState
    human: Player
    sims: int
    seed: int
    evaluator: NetworkEvaluator | None
    history: list[int] = field(default_factory=list)
    submissions: dict[int, dict] = field(default_factory=dict)
    engine_thinking: bool = False
    last_engine_visits: list[dict] | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def rng_for_ply(self, ply: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, ply])


def _player_name(p: Player | None) -> str | None:
    if p is None:
        return None
    return "first" if p == Player.FIRST else "second"


def _parse_player(name: str) -> Player:
    if name == "first":
        return Player.FIRST
    if name == "second":
        return Player.SECOND
    raise ApiError(400, "invalid_player", f"player must be 'first' or 'second', got {name!r}")


def _cells_json(game: Game, state: GameState) -> list[dict]:
    cells = []
    if isinstance(state, (HexState, HavannahState)):
        from .games.hex import BLACK, EMPTY
        black_player = state.black_player
        for r, c in game.playable_cells():
            v = state.cells[r * game.action_space.width + c]
            owner = None
            if v != EMPTY:
                owner = black_player if v == BLACK else black_player.opponent
            cells.append({"r": r, "c": c, "owner": _player_name(owner)})
    elif isinstance(state, ConnectState):
        for r, c in game.playable_cells():
            bit = 1 << (r * game.width + c)
            owner = (Player.FIRST if state.masks[0] & bit
                     else Player.SECOND if state.masks[1] & bit else None)
            cells.append({"r": r, "c": c, "owner": _player_name(owner)})
    elif isinstance(state, EwnState):
        for r, c in game.playable_cells():
            v = state.cells[r * 5 + c]
            entry: dict[str, Any] = {"r": r, "c": c, "owner": None}
            if v:
                entry["owner"] = _player_name(Player.FIRST if v <= 6 else Player.SECOND)
                entry["piece"] = v if v <= 6 else v - 8
            cells.append(entry)
    else:  # pragma: no cover - every shipped game is handled above
        raise ApiError(500, "unrenderable_game", f"no cell serialiser for {game.id}")
    return cells


def _action_json(game: Game, action: int, extra: dict | None = None) -> dict:
    ch, r, c = game.action_space.unravel(int(action))
    payload = {"channel": int(ch), "r": int(r), "c": int(c)}
    if extra:
        payload.update(extra)
    return payload


def match_json(match: Match) -> dict:
    game, state = match.game, match.state
    with_swap = getattr(game, "pie_rule", False) and state.ply == 1 and not state.status.is_terminal
    legal = [] if match.engine_thinking else game.legal_actions(state)
    status = {"kind": state.status.kind, "winner": _player_name(state.status.winner)}
    if getattr(state, "win_kind", None):
        status["win_kind"] = state.win_kind
    payload = {
        "id": match.id,
        "game": game.id,
        "board": {
            "kind": game.board_kind,
            "height": game.action_space.height,
            "width": game.action_space.width,
        },
        "ply": state.ply,
        "player_to_move": None if state.status.is_terminal else _player_name(state.player_to_move),
        "human_player": _player_name(match.human),
        "status": status,
        "cells": _cells_json(game, state),
        "legal_actions": [_action_json(game, a) for a in legal],
        "swap_legal": bool(with_swap and not match.engine_thinking
                           and state.player_to_move == match.human),
        "history": [_action_json(game, a) for a in match.history],
        "engine_thinking": match.engine_thinking,
        "last_engine_visits": match.last_engine_visits,
        "sims": match.sims,
    }
    if isinstance(state, EwnState) and not state.status.is_terminal:
        payload["pending_die"] = state.pending_die
    if isinstance(state, HexState) or isinstance(state, HavannahState):
        payload["swapped"] = state.swapped
    return payload


class MatchCreate(BaseModel):
    game: str
    size: int | None = None
    human_player: str = "first"
    sims: int | None = None
    checkpoint: str | None = None
    seed: int = 0


class MoveBody(BaseModel):
    ply: int
    action: dict


class MatchService:
    def __init__(self, checkpoint_path: str | Path | None = None,
                 match_dir: str | Path | None = None, default_sims: int = 64):
        self.matches: dict[str, Match] = {}
        self.match_dir = Path(match_dir) if match_dir else None
        self.default_sims = default_sims
        self.default_checkpoint = None
        if checkpoint_path is not None:
            self.default_checkpoint = load_checkpoint(checkpoint_path)

    # -- helpers -----------------------------------------------------------

    def _resolve_game(self, body: MatchCreate) -> Game:
        game_id = body.game if body.size is None else f"{body.game}{body.size}"
        try:
            game_family(game_id)
        except KeyError:
            raise ApiError(404, "unknown_game", f"unknown game {game_id!r}")
        try:
            return get_game(game_id)
        except (KeyError, ValueError) as exc:
            raise ApiError(400, "invalid_size", str(exc))

    def _resolve_evaluator(self, body: MatchCreate, game: Game) -> NetworkEvaluator | None:
        ckpt = self.default_checkpoint
        if body.checkpoint:
            try:
                ckpt = load_checkpoint(body.checkpoint)
            except Exception as exc:
                raise ApiError(400, "bad_checkpoint", f"cannot load checkpoint: {exc}")
        if ckpt is None:
            return None
        if game_family(ckpt.game_id) != game_family(game.id):
            raise ApiError(
                400, "incompatible_checkpoint",
                f"checkpoint was trained for {ckpt.game_id}, match is {game.id}")
        if ckpt.spec.policy_channels != game.action_space.channels:
            raise ApiError(400, "incompatible_checkpoint",
                           "checkpoint policy channels do not fit this game")
        return NetworkEvaluator(ckpt.network())

    def _advance_chance(self, match: Match, rng: np.random.Generator) -> None:
        while match.state.is_chance:
            outcomes = match.game.chance_outcomes(match.state)
            probs = [p for p, _ in outcomes]
            match.state = outcomes[rng.choice(len(outcomes), p=probs)][1]

    def _search_config(self, match: Match) -> SearchConfig:
        mode = PUCT if match.evaluator is not None else UCT
        # match play never adds exploration noise; replies are deterministic per seed
        return SearchConfig(mode=mode, simulations=match.sims, dirichlet_epsilon=0.0)

    def _engine_move_sync(self, match: Match) -> None:
        try:
            with match.lock:
                state = match.state
            if state.status.is_terminal or state.player_to_move == match.human:
                return
            rng = match.rng_for_ply(state.ply)
            result = run_search(match.game, state, self._search_config(match),
                                evaluator=match.evaluator, rng=rng)
            with match.lock:
                match.state = match.game.apply(match.state, result.action)
                match.history.append(result.action)
                match.last_engine_visits = [
                    _action_json(match.game, a, {"visits": int(result.visits[a])})
                    for a in np.flatnonzero(result.visits)
                ]
                self._advance_chance(match, rng)
                match.engine_thinking = False
            self._persist_if_finished(match)
        except Exception:
            log.exception("engine move failed for match %s", match.id)
            with match.lock:
                match.engine_thinking = False

    def _launch_engine(self, match: Match) -> None:
        match.engine_thinking = True
        threading.Thread(target=self._engine_move_sync, args=(match,),
                         name=f"engine-{match.id}", daemon=True).start()

    def _persist_if_finished(self, match: Match) -> None:
        if self.match_dir is None or not match.state.status.is_terminal:
            return
        self.match_dir.mkdir(parents=True, exist_ok=True)
        text = format_move_history(match.game.action_space, match.history)
        (self.match_dir / f"{match.id}.moves").write_text(text)

    # -- operations ----------------------------------------------------------

    def create_match(self, body: MatchCreate) -> Match:
        game = self._resolve_game(body)
        evaluator = self._resolve_evaluator(body, game)
        match = Match(
            id=uuid.uuid4().hex[:12],
            game=game,
            state=game.initial_state(),
            human=_parse_player(body.human_player),
            sims=body.sims or self.default_sims,
            seed=body.seed,
            evaluator=evaluator,
        )
        self._advance_chance(match, match.rng_for_ply(0))
        self.matches[match.id] = match
        if match.state.player_to_move != match.human:
            self._launch_engine(match)
        return match

    def get_match(self, match_id: str) -> Match:
        match = self.matches.get(match_id)
        if match is None:
            raise ApiError(404, "unknown_match", f"no match {match_id!r}")
        return match

    def submit_move(self, match_id: str, body: MoveBody) -> dict:
        match = self.get_match(match_id)
        with match.lock:
            previous = match.submissions.get(body.ply)
            if previous is not None:
                if previous["action"] == body.action:
                    return match_json(match)  # idempotent retry: same state, no double move
                raise ApiError(409, "conflicting_move",
                               f"a different move was already played at ply {body.ply}")
            state = match.state
            if state.status.is_terminal:
                raise ApiError(410, "match_finished", "the game is over")
            if match.engine_thinking or state.player_to_move != match.human:
                raise ApiError(409, "not_your_turn", "it is the engine's move")
            if body.ply != state.ply:
                raise ApiError(409, "stale_ply",
                               f"submitted for ply {body.ply}, match is at ply {state.ply}")
            try:
                action = match.game.action_space.index(
                    int(body.action["channel"]), int(body.action["r"]), int(body.action["c"]))
            except (KeyError, TypeError, IndexError) as exc:
                raise ApiError(422, "malformed_action", f"bad action payload: {exc}")
            try:
                next_state = match.game.apply(state, action)
            except IllegalActionError as exc:
                raise ApiError(422, "illegal_move", str(exc))
            match.state = next_state
            match.history.append(action)
            self._advance_chance(match, match.rng_for_ply(body.ply))
            if not match.state.status.is_terminal:
                self._launch_engine(match)
            match.submissions[body.ply] = {"action": body.action}
            snapshot = match_json(match)
        self._persist_if_finished(match)
        return snapshot


def create_app(checkpoint_path: str | Path | None = None,
               match_dir: str | Path | None = None,
               default_sims: int = 64,
               frontend_dir: str | Path | None = None) -> FastAPI:
    service = MatchService(checkpoint_path, match_dir, default_sims)
    app = FastAPI(title="zeroplay", version="0.1.0")
    app.state.service = service

    @app.exception_handler(ApiError)
    async def api_error_handler(_request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": exc.code, "message": exc.message})

    @app.get("/games")
    def list_games():
        return {"families": GAME_FAMILIES, "examples": EXAMPLE_IDS}

    @app.post("/matches", status_code=201)
    def create_match(body: MatchCreate):
        return match_json(service.create_match(body))

    @app.get("/matches/{match_id}")
    def get_match(match_id: str):
        match = service.get_match(match_id)
        with match.lock:
            return match_json(match)

    @app.post("/matches/{match_id}/moves")
    def submit_move(match_id: str, body: MoveBody):
        return service.submit_move(match_id, body)

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")
    return app
