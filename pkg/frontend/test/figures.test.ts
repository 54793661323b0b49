// Structure checks on the real datasets produced by the Python CLI
// (committed under testdata/), plus end-to-end rendering of both figures.

import { existsSync, readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { parseCsv } from "../src/csv.js";
import { pivotGrid } from "../src/grid.js";
import { parseFigureSpec } from "../src/figspec.js";
import { renderSpec } from "../src/render.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const DATA = join(HERE, "..", "testdata");
const SPECS = join(HERE, "..", "specs");

function centerRow(path: string, valueCol: string): number[] {
  const grid = pivotGrid(
    parseCsv(readFileSync(path, "utf-8")),
    "beta_re",
    "beta_im",
    valueCol,
  );
  const yi = grid.ys.findIndex((y) => Math.abs(y) < 1e-9);
  expect(yi).toBeGreaterThanOrEqual(0);
  return grid.values[yi].filter((v): v is number => v !== null);
}

describe("five-quantum scan dataset", () => {
  const ideal = join(DATA, "fock_scan", "ideal.csv");

  it("shows the five-ring sign structure along the real axis", () => {
    const row = centerRow(ideal, "chi_re");
    let flips = 0;
    for (let i = 1; i < row.length; i++) {
      if (Math.sign(row[i]) !== Math.sign(row[i - 1])) flips++;
    }
    // five zero circles cut the center row twice each
    expect(flips).toBe(10);
  });

  it("run-cost surface jumps at the period-count boundaries", () => {
    const row = centerRow(join(DATA, "fock_scan", "damping.csv"), "e2f");
    let jumps = 0;
    for (let i = 1; i < row.length; i++) {
      const ratio = row[i] / row[i - 1];
      if (ratio > 1.08 || ratio < 1 / 1.08) jumps++;
    }
    expect(jumps).toBeGreaterThanOrEqual(6);
  });

  it("damped signal is attenuated relative to the exact values", () => {
    const exact = centerRow(ideal, "chi_re");
    const damped = centerRow(join(DATA, "fock_scan", "records.csv"),
      "chi_re_raw");
    // compare at the outermost measurable cells
    expect(Math.abs(damped[0])).toBeLessThan(Math.abs(exact[0]));
  });
});

describe("superposition dataset", () => {
  it("interference peaks sit near beta = +-2 alpha and are damped", () => {
    const path = join(DATA, "cat_compare", "cat.csv");
    const idealIm = centerRow(path, "chi_ideal_im");
    const prepIm = centerRow(path, "chi_prepared_im");
    const peakIdeal = Math.max(...idealIm.map(Math.abs));
    const peakPrep = Math.max(...prepIm.map(Math.abs));
    expect(peakIdeal).toBeGreaterThan(0.3);
    expect(peakPrep).toBeLessThan(peakIdeal);
  });
});

describe("end-to-end figure rendering", () => {
  for (const name of ["fock_scan.json", "cat_compare.json"]) {
    it(`renders ${name}`, () => {
      const specPath = join(SPECS, name);
      expect(existsSync(specPath)).toBe(true);
      const spec = parseFigureSpec(readFileSync(specPath, "utf-8"));
      const svg = renderSpec(spec, SPECS);
      expect(svg.startsWith("<svg")).toBe(true);
      expect((svg.match(/<rect/g) ?? []).length).toBeGreaterThan(1000);
    });
  }
});
