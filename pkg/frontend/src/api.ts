/** Thin typed client for the match API. */

import type { Action, GamesList, MatchState } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, readonly code: string, message: string) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(base + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, body.error ?? "unknown", body.message ?? resp.statusText);
  }
  return body as T;
}

export interface CreateMatchOptions {
  game: string;
  size?: number;
  human_player?: "first" | "second";
  sims?: number;
  seed?: number;
}

export class Client {
  constructor(readonly base: string = "") {}

  listGames(): Promise<GamesList> {
    return request<GamesList>(this.base, "/games");
  }

  createMatch(options: CreateMatchOptions): Promise<MatchState> {
    return request<MatchState>(this.base, "/matches", {
      method: "POST",
      body: JSON.stringify(options),
    });
  }

  getMatch(id: string): Promise<MatchState> {
    return request<MatchState>(this.base, `/matches/${id}`);
  }

  submitMove(id: string, ply: number, action: Action): Promise<MatchState> {
    return request<MatchState>(this.base, `/matches/${id}/moves`, {
      method: "POST",
      body: JSON.stringify({ ply, action }),
    });
  }

  /** Poll until the engine reply has landed. Default cadence is one second. */
  async waitForEngine(id: string, intervalMs = 1000, timeoutMs = 120_000): Promise<MatchState> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const match = await this.getMatch(id);
      if (!match.engine_thinking) return match;
      if (Date.now() > deadline) throw new Error("engine reply timed out");
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }
}
