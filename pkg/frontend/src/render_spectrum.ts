/**
 * Eigenvalue scatter with the continuum-edge line.
 *
 * Usage: node dist/src/render_spectrum.js <spectrum.csv> --edge <value>
 *          [--meta <spectrum.meta.json>] --out <basename>
 *
 * Writes <basename>.svg and <basename>.png.  Discrete candidates
 * (eigenvalues below the edge) are highlighted.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { Figure, wrapSvg } from "./chart";
import { column, parseCsv, requireColumns } from "./csv";

export interface SpectrumArgs {
  csvPath: string;
  edge: number;
  outBase: string;
}

export function parseArgs(argv: string[]): SpectrumArgs {
  const positional: string[] = [];
  let edge: number | undefined;
  let meta: string | undefined;
  let out: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--edge") edge = Number(argv[++i]);
    else if (argv[i] === "--meta") meta = argv[++i];
    else if (argv[i] === "--out") out = argv[++i];
    else positional.push(argv[i]);
  }
  if (positional.length !== 1) {
    throw new Error("expected exactly one CSV path");
  }
  if (edge === undefined && meta) {
    edge = JSON.parse(readFileSync(meta, "utf-8")).continuum_edge;
  }
  if (edge === undefined || Number.isNaN(edge)) {
    throw new Error("continuum edge required (--edge or --meta)");
  }
  return { csvPath: positional[0], edge, outBase: out ?? "spectrum" };
}

export function renderSpectrum(csvText: string, edge: number): { svg: string; png: Buffer } {
  const table = parseCsv(csvText);
  requireColumns(table, ["index", "eigenvalue", "residual"]);
  const idx = column(table, "index");
  const vals = column(table, "eigenvalue");

  const lo = Math.min(edge, ...vals);
  const hi = Math.max(edge, ...vals);
  const pad = 0.1 * (hi - lo || 1);
  const fig = new Figure({
    x: { min: -0.5, max: Math.max(idx.length - 0.5, 0.5), label: "index" },
    y: { min: lo - pad, max: hi + pad, label: "eigenvalue" },
    title: "operator spectrum",
    width: 640,
    height: 420,
    margin: { l: 70, r: 20, t: 40, b: 50 },
  });
  fig.axes();
  fig.hline(edge, "#2d6a4f", [45, 106, 79], `continuum edge ${edge.toPrecision(4)}`);
  const disc = idx.filter((_, i) => vals[i] < edge);
  const discV = vals.filter((v) => v < edge);
  const band = idx.filter((_, i) => vals[i] >= edge);
  const bandV = vals.filter((v) => v >= edge);
  fig.scatter(band, bandV, "#4361ee", [67, 97, 238], 4);
  fig.scatter(disc, discV, "#e63946", [230, 57, 70], 5);
  fig.raw(
    `<text x="590" y="30" font-size="11" text-anchor="end" fill="#e63946">discrete candidates</text>`
  );
  return { svg: wrapSvg(640, 420, fig.svgBody()), png: fig.raster.encode() };
}

export function main(argv: string[]): void {
  const args = parseArgs(argv);
  const { svg, png } = renderSpectrum(readFileSync(args.csvPath, "utf-8"), args.edge);
  writeFileSync(`${args.outBase}.svg`, svg);
  writeFileSync(`${args.outBase}.png`, png);
  console.log(`wrote ${args.outBase}.svg and ${args.outBase}.png`);
}

if (require.main === module) {
  try {
    main(process.argv.slice(2));
  } catch (err) {
    console.error(`render_spectrum failed: ${(err as Error).message}`);
    process.exit(1);
  }
}
