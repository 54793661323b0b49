import { ColormapName, MISSING_COLOR, colorFor } from "./colormap.js";
import { Grid, gridRange } from "./grid.js";

export interface PanelOptions {
  label: string;
  colormap: ColormapName;
  /** log10-compress values before coloring (for e^{2f}-style surfaces) */
  logScale: boolean;
}

const CELL = 9;
const MARGIN_LEFT = 46;
const MARGIN_BOTTOM = 38;
const MARGIN_TOP = 24;
const MARGIN_RIGHT = 10;

function fmtTick(v: number): string {
  return Math.abs(v) < 1e-12 ? "0" : v.toFixed(1);
}

export function panelSize(grid: Grid): { width: number; height: number } {
  return {
    width: MARGIN_LEFT + grid.xs.length * CELL + MARGIN_RIGHT,
    height: MARGIN_TOP + grid.ys.length * CELL + MARGIN_BOTTOM,
  };
}

/** One heatmap panel as an SVG group rooted at (0, 0). */
export function renderPanel(grid: Grid, opts: PanelOptions): string {
  const transform = (v: number) => (opts.logScale ? Math.log10(v) : v);
  const transformed: Grid = {
    ...grid,
    values: grid.values.map((row) =>
      row.map((v) => (v === null ? null : transform(v))),
    ),
  };
  const { min, max } = gridRange(transformed);
  let lo = min;
  let hi = max;
  if (opts.colormap === "diverging") {
    const mag = Math.max(Math.abs(min), Math.abs(max));
    lo = -mag;
    hi = mag;
  }
  const ny = grid.ys.length;
  const parts: string[] = [];
  parts.push(
    `<text x="${MARGIN_LEFT}" y="${MARGIN_TOP - 8}" font-size="12" ` +
      `font-family="sans-serif">${opts.label}</text>`,
  );
  transformed.values.forEach((row, yi) => {
    row.forEach((v, xi) => {
      const color =
        v === null ? MISSING_COLOR : colorFor(opts.colormap, v, lo, hi);
      const x = MARGIN_LEFT + xi * CELL;
      const y = MARGIN_TOP + (ny - 1 - yi) * CELL; // Im beta increases upward
      parts.push(
        `<rect x="${x}" y="${y}" width="${CELL}" height="${CELL}" fill="${color}"/>`,
      );
    });
  });
  const plotW = grid.xs.length * CELL;
  const plotH = ny * CELL;
  parts.push(
    `<rect x="${MARGIN_LEFT}" y="${MARGIN_TOP}" width="${plotW}" ` +
      `height="${plotH}" fill="none" stroke="black" stroke-width="1"/>`,
  );
  const xTicks = [grid.xs[0], 0, grid.xs[grid.xs.length - 1]];
  for (const t of xTicks) {
    const frac = (t - grid.xs[0]) / (grid.xs[grid.xs.length - 1] - grid.xs[0]);
    const x = MARGIN_LEFT + frac * plotW;
    parts.push(
      `<text x="${x}" y="${MARGIN_TOP + plotH + 14}" font-size="10" ` +
        `text-anchor="middle" font-family="sans-serif">${fmtTick(t)}</text>`,
    );
  }
  const yTicks = [grid.ys[0], 0, grid.ys[ny - 1]];
  for (const t of yTicks) {
    const frac = (t - grid.ys[0]) / (grid.ys[ny - 1] - grid.ys[0]);
    const y = MARGIN_TOP + (1 - frac) * plotH;
    parts.push(
      `<text x="${MARGIN_LEFT - 6}" y="${y + 3}" font-size="10" ` +
        `text-anchor="end" font-family="sans-serif">${fmtTick(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${MARGIN_LEFT + plotW / 2}" y="${MARGIN_TOP + plotH + 30}" ` +
      `font-size="11" text-anchor="middle" font-family="sans-serif">Re &#946;</text>`,
  );
  parts.push(
    `<text x="12" y="${MARGIN_TOP + plotH / 2}" font-size="11" ` +
      `text-anchor="middle" font-family="sans-serif" ` +
      `transform="rotate(-90 12 ${MARGIN_TOP + plotH / 2})">Im &#946;</text>`,
  );
  return parts.join("\n");
}

/** Lay panels out left to right, wrapping after `columns`. */
export function renderFigure(
  panels: { grid: Grid; options: PanelOptions }[],
  columns: number,
  title?: string,
): string {
  if (panels.length === 0) {
    throw new Error("figure has no panels");
  }
  const sizes = panels.map((p) => panelSize(p.grid));
  const cols = Math.min(columns, panels.length);
  const rows = Math.ceil(panels.length / cols);
  const cellW = Math.max(...sizes.map((s) => s.width));
  const cellH = Math.max(...sizes.map((s) => s.height));
  const titlePad = title ? 22 : 0;
  const width = cols * cellW;
  const height = rows * cellH + titlePad;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
      `height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
  ];
  if (title) {
    parts.push(
      `<text x="${width / 2}" y="16" font-size="14" text-anchor="middle" ` +
        `font-family="sans-serif">${title}</text>`,
    );
  }
  panels.forEach((panel, i) => {
    const cx = (i % cols) * cellW;
    const cy = Math.floor(i / cols) * cellH + titlePad;
    parts.push(`<g transform="translate(${cx} ${cy})">`);
    parts.push(renderPanel(panel.grid, panel.options));
    parts.push("</g>");
  });
  parts.push("</svg>");
  return parts.join("\n");
}
