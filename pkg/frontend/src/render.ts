import { readFileSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";

import { parseCsv, Table } from "./csv.js";
import { FigureSpec, parseFigureSpec } from "./figspec.js";
import { pivotGrid } from "./grid.js";
import { PanelOptions, renderFigure } from "./svg.js";

/** Build the SVG for a spec; dataset paths resolve relative to `baseDir`. */
export function renderSpec(spec: FigureSpec, baseDir: string): string {
  const tables = new Map<string, Table>();
  const panels = spec.panels.map((panel) => {
    const path = resolve(baseDir, panel.dataset);
    if (!tables.has(path)) {
      tables.set(path, parseCsv(readFileSync(path, "utf-8")));
    }
    const grid = pivotGrid(tables.get(path)!, panel.x, panel.y, panel.value);
    const options: PanelOptions = {
      label: panel.label,
      colormap: panel.colormap,
      logScale: panel.scale === "log",
    };
    return { grid, options };
  });
  return renderFigure(panels, spec.columns, spec.title);
}

export function main(argv: string[]): number {
  const specIndex = argv.indexOf("--spec");
  if (specIndex < 0 || specIndex + 1 >= argv.length) {
    console.error("usage: render --spec <figure-spec.json>");
    return 1;
  }
  const specPath = resolve(argv[specIndex + 1]);
  let spec: FigureSpec;
  try {
    spec = parseFigureSpec(readFileSync(specPath, "utf-8"));
  } catch (err) {
    console.error(`cannot load spec: ${(err as Error).message}`);
    return 1;
  }
  let svg: string;
  try {
    svg = renderSpec(spec, dirname(specPath));
  } catch (err) {
    // no output file on failure
    console.error(`render failed: ${(err as Error).message}`);
    return 2;
  }
  const outPath = resolve(dirname(specPath), spec.out);
  writeFileSync(outPath, svg, "utf-8");
  console.log(`wrote ${outPath}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
