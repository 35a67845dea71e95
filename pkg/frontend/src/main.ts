/** Page wiring: new-match form, click handling, one-second engine polling. */

import { Client } from "./api.js";
import { buildView, renderMatch } from "./view.js";
import type { Action, MatchState } from "./types.js";

const POLL_INTERVAL_MS = 1000;

const client = new Client("");
let current: MatchState | null = null;
let submitting = false;
let pollTimer: ReturnType<typeof setTimeout> | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setError(message: string | null): void {
  const banner = el<HTMLDivElement>("error-banner");
  banner.textContent = message ?? "";
  banner.style.display = message ? "block" : "none";
}

function show(match: MatchState): void {
  current = match;
  const view = buildView(match);
  renderMatch(el("board-container"), view, { onAction: submit });
  el<HTMLDivElement>("match-meta").textContent =
    `${match.game} · match ${match.id} · ply ${match.ply}`;
  if (match.engine_thinking) schedulePoll();
}

function schedulePoll(): void {
  if (pollTimer !== null) return;
  pollTimer = setTimeout(async () => {
    pollTimer = null;
    if (!current) return;
    try {
      show(await client.getMatch(current.id));
    } catch (err) {
      setError(String(err));
    }
  }, POLL_INTERVAL_MS);
}

async function submit(action: Action): Promise<void> {
  if (!current || submitting) return;  // one in-flight mutation at a time
  submitting = true;
  try {
    setError(null);
    show(await client.submitMove(current.id, current.ply, action));
  } catch (err) {
    setError(String(err));
  } finally {
    submitting = false;
  }
}

async function newMatch(): Promise<void> {
  const game = el<HTMLSelectElement>("game-select").value;
  const human = el<HTMLSelectElement>("human-select").value as "first" | "second";
  const sims = parseInt(el<HTMLInputElement>("sims-input").value, 10) || 64;
  try {
    setError(null);
    show(await client.createMatch({ game, human_player: human, sims }));
  } catch (err) {
    setError(String(err));
  }
}

async function boot(): Promise<void> {
  try {
    const games = await client.listGames();
    const select = el<HTMLSelectElement>("game-select");
    select.replaceChildren();
    for (const id of games.examples) {
      const option = document.createElement("option");
      option.value = id;
      option.textContent = id;
      select.appendChild(option);
    }
  } catch (err) {
    setError(`cannot reach the server: ${err}`);
  }
  el<HTMLButtonElement>("new-match").addEventListener("click", () => void newMatch());
}

void boot();
