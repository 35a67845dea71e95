/**
 * Board geometries: cell centres, outlines, and the exact inverse transform
 * from a pixel point back to the cell containing it.
 *
 * Hex cells are pointy-top. The rhombus layout shears each row right by half
 * a cell: center(r, c) = origin + c * (dx, 0) + r * (dx/2, dy) with
 * dx = sqrt(3) * size and dy = 1.5 * size. The hexagonal (hex-hex) layout
 * uses the same transform over axial coordinates q = col - R, r = row - R.
 * Inverse mapping goes through fractional axial coordinates plus cube
 * rounding, which picks the nearest centre and is therefore exact on the
 * hexagon tiles themselves.
 */

import type { BoardKind } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

export interface CellRC {
  r: number;
  c: number;
}

const SQRT3 = Math.sqrt(3);

export interface BoardGeometry {
  readonly kind: BoardKind;
  /** Every playable cell, in server (row, col) coordinates. */
  cells(): CellRC[];
  /** Pixel centre of a cell. */
  cellCenter(cell: CellRC): Point;
  /** Corner points of the cell outline, for SVG paths. */
  cellPolygon(cell: CellRC): Point[];
  /** The cell containing the point, or null when off the board. */
  pixelToCell(p: Point): CellRC | null;
  /** Drawing-surface extent. */
  extent(): { width: number; height: number };
}

function hexCorners(center: Point, size: number): Point[] {
  const pts: Point[] = [];
  for (let i = 0; i < 6; i++) {
    const angle = (Math.PI / 180) * (60 * i - 30);
    pts.push({ x: center.x + size * Math.cos(angle), y: center.y + size * Math.sin(angle) });
  }
  return pts;
}

/** Fractional axial coordinates of a pixel under the pointy-top transform. */
function pixelToAxial(x: number, y: number, size: number): { q: number; r: number } {
  const q = ((SQRT3 / 3) * x - (1 / 3) * y) / size;
  const r = ((2 / 3) * y) / size;
  return { q, r };
}

function axialRound(q: number, r: number): { q: number; r: number } {
  const s = -q - r;
  let rq = Math.round(q);
  let rr = Math.round(r);
  let rs = Math.round(s);
  const dq = Math.abs(rq - q);
  const dr = Math.abs(rr - r);
  const ds = Math.abs(rs - s);
  if (dq > dr && dq > ds) {
    rq = -rr - rs;
  } else if (dr > ds) {
    rr = -rq - rs;
  }
  return { q: rq + 0, r: rr + 0 }; // adding 0 turns Math.round's -0 into +0
}

class HexRhombusGeometry implements BoardGeometry {
  readonly kind: BoardKind = "hex-rhombus";

  constructor(readonly size: number, readonly cellSize: number,
              readonly origin: Point) {}

  cells(): CellRC[] {
    const out: CellRC[] = [];
    for (let r = 0; r < this.size; r++) {
      for (let c = 0; c < this.size; c++) {
        out.push({ r, c });
      }
    }
    return out;
  }

  cellCenter(cell: CellRC): Point {
    const dx = SQRT3 * this.cellSize;
    const dy = 1.5 * this.cellSize;
    return {
      x: this.origin.x + cell.c * dx + cell.r * (dx / 2),
      y: this.origin.y + cell.r * dy,
    };
  }

  cellPolygon(cell: CellRC): Point[] {
    return hexCorners(this.cellCenter(cell), this.cellSize);
  }

  pixelToCell(p: Point): CellRC | null {
    const frac = pixelToAxial(p.x - this.origin.x, p.y - this.origin.y, this.cellSize);
    const { q, r } = axialRound(frac.q, frac.r);
    if (r < 0 || r >= this.size || q < 0 || q >= this.size) return null;
    return { r, c: q };
  }

  extent(): { width: number; height: number } {
    const last = this.cellCenter({ r: this.size - 1, c: this.size - 1 });
    return { width: last.x + 2 * this.cellSize, height: last.y + 2 * this.cellSize };
  }
}

class HexHexGeometry implements BoardGeometry {
  readonly kind: BoardKind = "hex-hex";
  private readonly radius: number;

  /** `side` is the tensor side length 2S-1 for base size S. */
  constructor(readonly side: number, readonly cellSize: number,
              readonly origin: Point) {
    this.radius = (side - 1) / 2;
  }

  private valid(q: number, r: number): boolean {
    return Math.abs(q) <= this.radius && Math.abs(r) <= this.radius
      && Math.abs(q + r) <= this.radius;
  }

  cells(): CellRC[] {
    const out: CellRC[] = [];
    for (let row = 0; row < this.side; row++) {
      for (let col = 0; col < this.side; col++) {
        if (this.valid(col - this.radius, row - this.radius)) {
          out.push({ r: row, c: col });
        }
      }
    }
    return out;
  }

  cellCenter(cell: CellRC): Point {
    const q = cell.c - this.radius;
    const r = cell.r - this.radius;
    return {
      x: this.origin.x + this.cellSize * SQRT3 * (q + r / 2),
      y: this.origin.y + this.cellSize * 1.5 * r,
    };
  }

  cellPolygon(cell: CellRC): Point[] {
    return hexCorners(this.cellCenter(cell), this.cellSize);
  }

  pixelToCell(p: Point): CellRC | null {
    const frac = pixelToAxial(p.x - this.origin.x, p.y - this.origin.y, this.cellSize);
    const { q, r } = axialRound(frac.q, frac.r);
    if (!this.valid(q, r)) return null;
    return { r: r + this.radius, c: q + this.radius };
  }

  extent(): { width: number; height: number } {
    const d = (2 * this.radius + 1) * SQRT3 * this.cellSize + 2 * this.cellSize;
    return { width: d, height: d };
  }
}

class SquareGeometry implements BoardGeometry {
  readonly kind: BoardKind = "square";

  /** Row 0 of a gravity board is drawn at the bottom when flipped is set. */
  constructor(readonly height: number, readonly width: number,
              readonly cellSize: number, readonly origin: Point,
              readonly flipped: boolean = false) {}

  cells(): CellRC[] {
    const out: CellRC[] = [];
    for (let r = 0; r < this.height; r++) {
      for (let c = 0; c < this.width; c++) {
        out.push({ r, c });
      }
    }
    return out;
  }

  private drawRow(r: number): number {
    return this.flipped ? this.height - 1 - r : r;
  }

  cellCenter(cell: CellRC): Point {
    return {
      x: this.origin.x + (cell.c + 0.5) * this.cellSize,
      y: this.origin.y + (this.drawRow(cell.r) + 0.5) * this.cellSize,
    };
  }

  cellPolygon(cell: CellRC): Point[] {
    const { x, y } = this.cellCenter(cell);
    const h = this.cellSize / 2;
    return [
      { x: x - h, y: y - h }, { x: x + h, y: y - h },
      { x: x + h, y: y + h }, { x: x - h, y: y + h },
    ];
  }

  pixelToCell(p: Point): CellRC | null {
    const c = Math.floor((p.x - this.origin.x) / this.cellSize);
    const row = Math.floor((p.y - this.origin.y) / this.cellSize);
    if (row < 0 || row >= this.height || c < 0 || c >= this.width) return null;
    return { r: this.drawRow(row), c };
  }

  extent(): { width: number; height: number } {
    return { width: this.width * this.cellSize, height: this.height * this.cellSize };
  }
}

export function boardGeometry(kind: BoardKind, height: number, width: number,
                              cellSize = 24, gravity = false): BoardGeometry {
  if (kind === "hex-rhombus") {
    return new HexRhombusGeometry(width, cellSize, { x: 1.5 * cellSize, y: 1.5 * cellSize });
  }
  if (kind === "hex-hex") {
    const radius = (width - 1) / 2;
    const mid = (radius + 1) * SQRT3 * cellSize;
    return new HexHexGeometry(width, cellSize, { x: mid, y: mid });
  }
  return new SquareGeometry(height, width, cellSize * 1.6, { x: 2, y: 2 }, gravity);
}
