/**
 * Board view model and SVG rendering.
 *
 * The view model is pure data derived from a match payload; the click
 * translation consults the legality set so the client never submits an
 * action the server has not offered.
 */

import { boardGeometry, type BoardGeometry, type Point } from "./geometry.js";
import { actionKey, type Action, type Cell, type MatchState } from "./types.js";

export interface BoardView {
  match: MatchState;
  geometry: BoardGeometry;
  cellOwners: Map<string, Cell>;
  legal: Map<string, Action>;
  /** Legal placement actions by cell, ignoring the channel. */
  legalByCell: Map<string, Action>;
  /** Legal actions by column, for gravity boards. */
  legalByColumn: Map<number, Action>;
  swapAction: Action | null;
  lastMove: Action | null;
  /** Visit share per cell from the last engine search, for the overlay. */
  visitShare: Map<string, number>;
  myTurn: boolean;
}

const cellKey = (r: number, c: number) => `${r},${c}`;

export function buildView(match: MatchState): BoardView {
  const gravity = match.game.startsWith("connect");
  const geometry = boardGeometry(match.board.kind, match.board.height,
                                 match.board.width, 24, gravity);
  const cellOwners = new Map<string, Cell>();
  for (const cell of match.cells) {
    cellOwners.set(cellKey(cell.r, cell.c), cell);
  }
  const legal = new Map<string, Action>();
  const legalByCell = new Map<string, Action>();
  const legalByColumn = new Map<number, Action>();
  let swapAction: Action | null = null;
  for (const action of match.legal_actions) {
    legal.set(actionKey(action), action);
    if (match.swap_legal && action.channel !== 0 && action.r === 0 && action.c === 0) {
      swapAction = action;
      continue;
    }
    legalByCell.set(cellKey(action.r, action.c), action);
    if (!legalByColumn.has(action.c)) {
      legalByColumn.set(action.c, action);
    }
  }
  const visitShare = new Map<string, number>();
  if (match.last_engine_visits) {
    for (const v of match.last_engine_visits) {
      const key = cellKey(v.r, v.c);
      visitShare.set(key, (visitShare.get(key) ?? 0) + v.visits / match.sims);
    }
  }
  return {
    match,
    geometry,
    cellOwners,
    legal,
    legalByCell,
    legalByColumn,
    swapAction,
    lastMove: match.history.length ? match.history[match.history.length - 1]! : null,
    visitShare,
    myTurn: !match.engine_thinking && match.status.kind === "ongoing"
      && match.player_to_move === match.human_player,
  };
}

/**
 * Translate a pixel point into a submit-able action, or null.
 *
 * Gravity boards accept a click anywhere in a column and map it to that
 * column's landing action; everywhere else the click must land on a cell
 * whose placement action is currently legal.
 */
export function cellClickToAction(view: BoardView, point: Point): Action | null {
  if (!view.myTurn) return null;
  const cell = view.geometry.pixelToCell(point);
  if (cell === null) return null;
  const direct = view.legalByCell.get(cellKey(cell.r, cell.c));
  if (direct) return direct;
  if (view.geometry.kind === "square" && view.legalByColumn.size > 0) {
    return view.legalByColumn.get(cell.c) ?? null;
  }
  return null;
}

// -- DOM rendering ------------------------------------------------------------

const SVG_NS = "http://www.w3.org/2000/svg";
const OWNER_FILL = { first: "#1c1c1e", second: "#f5f5f0" };

function polygonPath(points: Point[]): string {
  return points.map((p) => `${p.x.toFixed(2)},${p.y.toFixed(2)}`).join(" ");
}

export interface RenderHandlers {
  onAction(action: Action): void;
}

export function statusLine(match: MatchState): string {
  if (match.status.kind === "win") {
    const kind = match.status.win_kind ? ` by ${match.status.win_kind}` : "";
    const who = match.status.winner === match.human_player ? "You win" : "Engine wins";
    return `${who}${kind}!`;
  }
  if (match.status.kind === "draw") return "Draw.";
  if (match.engine_thinking) return "Engine is thinking...";
  if (match.player_to_move === match.human_player) {
    const die = match.pending_die != null ? ` (die: ${match.pending_die})` : "";
    return `Your move${die}.`;
  }
  return "Waiting for the engine...";
}

export function renderMatch(container: HTMLElement, view: BoardView,
                            handlers: RenderHandlers): void {
  const doc = container.ownerDocument;
  container.replaceChildren();

  const banner = doc.createElement("div");
  banner.className = "status-banner";
  banner.textContent = statusLine(view.match);
  container.appendChild(banner);

  const { width, height } = view.geometry.extent();
  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.classList.add("board", view.match.board.kind);

  for (const cell of view.geometry.cells()) {
    const key = cellKey(cell.r, cell.c);
    const info = view.cellOwners.get(key);
    const poly = doc.createElementNS(SVG_NS, "polygon");
    poly.setAttribute("points", polygonPath(view.geometry.cellPolygon(cell)));
    poly.setAttribute("data-cell", key);
    poly.classList.add("cell");
    const clickable = view.myTurn
      && (view.legalByCell.has(key)
          || (view.geometry.kind === "square" && view.legalByColumn.has(cell.c)));
    if (clickable) poly.classList.add("clickable");
    svg.appendChild(poly);

    const share = view.visitShare.get(key);
    if (share && !info?.owner) {
      const heat = doc.createElementNS(SVG_NS, "circle");
      const center = view.geometry.cellCenter(cell);
      heat.setAttribute("cx", String(center.x));
      heat.setAttribute("cy", String(center.y));
      heat.setAttribute("r", "7");
      heat.classList.add("visit-overlay");
      heat.setAttribute("opacity", Math.min(1, 0.15 + share).toFixed(3));
      svg.appendChild(heat);
    }

    if (info?.owner) {
      const stone = doc.createElementNS(SVG_NS, "circle");
      const center = view.geometry.cellCenter(cell);
      stone.setAttribute("cx", String(center.x));
      stone.setAttribute("cy", String(center.y));
      stone.setAttribute("r", "9");
      stone.setAttribute("fill", OWNER_FILL[info.owner]);
      stone.classList.add("stone");
      if (view.lastMove && view.lastMove.r === cell.r && view.lastMove.c === cell.c) {
        stone.classList.add("last-move");
      }
      svg.appendChild(stone);
      if (info.piece != null) {
        const label = doc.createElementNS(SVG_NS, "text");
        const center2 = view.geometry.cellCenter(cell);
        label.setAttribute("x", String(center2.x));
        label.setAttribute("y", String(center2.y + 4));
        label.setAttribute("text-anchor", "middle");
        label.classList.add("piece-label");
        label.textContent = String(info.piece);
        svg.appendChild(label);
      }
    }
  }

  svg.addEventListener("click", (event: MouseEvent) => {
    const rect = svg.getBoundingClientRect();
    const scaleX = rect.width > 0 ? width / rect.width : 1;
    const scaleY = rect.height > 0 ? height / rect.height : 1;
    const point = {
      x: (event.clientX - rect.left) * scaleX,
      y: (event.clientY - rect.top) * scaleY,
    };
    const action = cellClickToAction(view, point);
    if (action) handlers.onAction(action);
  });
  container.appendChild(svg);

  if (view.swapAction && view.myTurn) {
    const swap = doc.createElement("button");
    swap.className = "swap-button";
    swap.textContent = "Swap colours (pie rule)";
    swap.addEventListener("click", () => handlers.onAction(view.swapAction!));
    container.appendChild(swap);
  }
}
