/** Payload types for the match API. */

export type PlayerName = "first" | "second";

export interface Action {
  channel: number;
  r: number;
  c: number;
}

export interface Cell {
  r: number;
  c: number;
  owner: PlayerName | null;
  piece?: number;
}

export interface EngineVisit extends Action {
  visits: number;
}

export type BoardKind = "square" | "hex-rhombus" | "hex-hex";

export interface MatchState {
  id: string;
  game: string;
  board: { kind: BoardKind; height: number; width: number };
  ply: number;
  player_to_move: PlayerName | null;
  human_player: PlayerName;
  status: { kind: "ongoing" | "win" | "draw"; winner: PlayerName | null; win_kind?: string };
  cells: Cell[];
  legal_actions: Action[];
  swap_legal: boolean;
  history: Action[];
  engine_thinking: boolean;
  last_engine_visits: EngineVisit[] | null;
  sims: number;
  pending_die?: number;
  swapped?: boolean;
}

export interface GamesList {
  families: Record<string, string>;
  examples: string[];
}

export function actionKey(a: Action): string {
  return `${a.channel},${a.r},${a.c}`;
}
