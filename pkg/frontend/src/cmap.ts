/**
 * Parser for the service's plain-text confidence maps. One value covers an
 * 8x8 pixel region; the hover readout looks values up here instead of
 * sampling pixels.
 */

export const REGION_SIZE = 8;

export interface ConfidenceGrid {
  width: number;
  height: number;
  /** Row-major, length width * height, each value in [0,1]. */
  values: Float64Array;
}

export function parseCmap(text: string): ConfidenceGrid {
  const lines = text.split("\n").filter((line) => line.trim() !== "");
  if (lines.length === 0) throw new Error("empty confidence map");
  const header = lines[0]!.trim().split(/\s+/);
  if (header.length !== 3 || header[0] !== "CMAP") {
    throw new Error(`bad header ${JSON.stringify(lines[0])}, expected "CMAP <width> <height>"`);
  }
  const width = Number(header[1]);
  const height = Number(header[2]);
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new Error(`bad dimensions ${header[1]}x${header[2]}`);
  }
  if (lines.length - 1 !== height) {
    throw new Error(`expected ${height} rows, got ${lines.length - 1}`);
  }
  const values = new Float64Array(width * height);
  for (let row = 0; row < height; row += 1) {
    const cells = lines[row + 1]!.trim().split(/\s+/);
    if (cells.length !== width) {
      throw new Error(`row ${row} has ${cells.length} values, expected ${width}`);
    }
    for (let col = 0; col < width; col += 1) {
      const value = Number(cells[col]);
      if (!Number.isFinite(value) || value < 0 || value > 1) {
        throw new Error(`row ${row} value ${JSON.stringify(cells[col])} outside [0,1]`);
      }
      values[row * width + col] = value;
    }
  }
  return { width, height, values };
}

/** Confidence of the region containing image pixel (px, py); coordinates clamp to the grid. */
export function confidenceAt(grid: ConfidenceGrid, px: number, py: number): number {
  const col = Math.min(grid.width - 1, Math.max(0, Math.floor(px / REGION_SIZE)));
  const row = Math.min(grid.height - 1, Math.max(0, Math.floor(py / REGION_SIZE)));
  return grid.values[row * grid.width + col]!;
}
