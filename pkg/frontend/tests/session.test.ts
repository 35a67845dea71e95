/**
 * Scripted session against a live server: create a Hex 7x7 match as the
 * second player, swap at ply 1, then play clicks at cell centroids until the
 * game ends. Every submitted action must be accepted by the server.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { buildView, cellClickToAction } from "../src/view.js";
import type { Action, MatchState } from "../src/types.js";

const PORT = 8765 + Math.floor(Math.random() * 200);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;

const BOOT_SCRIPT = `
import os
import numpy as np
import uvicorn
from zeroplay.nn import Checkpoint, Network, NetworkSpec, save_checkpoint
from zeroplay.server import create_app

ckpt_path = os.environ["UI_TEST_CKPT"]
spec = NetworkSpec(trunk_channels=4, residual_blocks=1, value_pool_channels=2,
                   value_hidden=8, policy_channels=2)
net = Network.initialize(spec, np.random.default_rng(0))
save_checkpoint(Checkpoint.of(net, "hex7", 0), ckpt_path)
app = create_app(ckpt_path, match_dir=os.environ["UI_TEST_MATCH_DIR"], default_sims=12)
uvicorn.run(app, host="127.0.0.1", port=int(os.environ["UI_TEST_PORT"]), log_level="warning")
`;

async function waitForServer(client: Client, timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      await client.listGames();
      return;
    } catch {
      if (Date.now() > deadline) throw new Error("server did not come up");
      await new Promise((resolve) => setTimeout(resolve, 200));
    }
  }
}

describe("scripted hex session against the live server", () => {
  const client = new Client(BASE);

  beforeAll(async () => {
    const probe = spawnSync("python3", ["-c", "import zeroplay"], { encoding: "utf-8" });
    if (probe.status !== 0) {
      throw new Error(`zeroplay package not importable: ${probe.stderr}`);
    }
    const dir = mkdtempSync(join(tmpdir(), "zeroplay-ui-"));
    const scriptPath = join(dir, "serve.py");
    writeFileSync(scriptPath, BOOT_SCRIPT);
    server = spawn("python3", [scriptPath], {
      stdio: ["ignore", "inherit", "inherit"],
      env: {
        ...process.env,
        UI_TEST_CKPT: join(dir, "hex7.ckpt"),
        UI_TEST_MATCH_DIR: join(dir, "matches"),
        UI_TEST_PORT: String(PORT),
      },
    });
    await waitForServer(client);
  }, 60_000);

  afterAll(() => {
    server?.kill("SIGTERM");
  });

  it("completes a full hex7 match including a ply-1 swap", async () => {
    let match = await client.createMatch({
      game: "hex7",
      human_player: "second",
      sims: 12,
      seed: 3,
    });
    match = await client.waitForEngine(match.id, 50);

    // ply 1: the pie-rule swap must be on offer, surfaced by the view
    expect(match.ply).toBe(1);
    let view = buildView(match);
    expect(view.swapAction).not.toBeNull();
    match = await client.submitMove(match.id, match.ply, view.swapAction!);
    expect(match.swapped).toBe(true);

    let submitted = 1;
    while (match.status.kind === "ongoing") {
      match = await client.waitForEngine(match.id, 50);
      if (match.status.kind !== "ongoing") break;
      view = buildView(match);
      expect(view.myTurn).toBe(true);

      // click the centroid of the first open legal cell, like a browser would
      const target = match.legal_actions.find((a: Action) => a.channel === 0)!;
      const centre = view.geometry.cellCenter({ r: target.r, c: target.c });
      const action = cellClickToAction(view, centre);
      expect(action).toEqual(target);

      match = await client.submitMove(match.id, match.ply, action!);
      submitted += 1;
    }

    expect(match.status.kind).toBe("win");
    expect(match.history.length).toBeGreaterThanOrEqual(submitted);
    // the swap sits at ply 1 of the recorded history
    expect(match.history[1]).toEqual({ channel: 1, r: 0, c: 0 });
  }, 120_000);

  it("rejects a click on an occupied cell before it reaches the server", async () => {
    let match = await client.createMatch({ game: "hex7", human_player: "first", sims: 8 });
    const centre = { r: 3, c: 3 };
    let view = buildView(match);
    const first = cellClickToAction(view, view.geometry.cellCenter(centre));
    expect(first).toEqual({ channel: 0, r: 3, c: 3 });
    match = await client.submitMove(match.id, match.ply, first!);
    match = await client.waitForEngine(match.id, 50);

    view = buildView(match);
    const again = cellClickToAction(view, view.geometry.cellCenter(centre));
    expect(again).toBeNull(); // occupied cell is no longer clickable
  }, 60_000);
});
