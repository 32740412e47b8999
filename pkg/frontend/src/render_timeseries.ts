/**
 * Two-panel evolution figure: relative energy/momentum drift on a log
 * scale, and the orbital distance against time.
 *
 * Usage: node dist/src/render_timeseries.js <evolve.csv> --out <basename>
 */

import { readFileSync, writeFileSync } from "node:fs";
import { Figure, wrapSvg } from "./chart";
import { Raster } from "./png";
import { column, parseCsv, requireColumns } from "./csv";

export function renderTimeseries(csvText: string): { svg: string; png: Buffer } {
  const table = parseCsv(csvText);
  requireColumns(table, ["t", "H_drift_rel", "P_drift_rel", "orb_dist"]);
  const t = column(table, "t");
  const hd = column(table, "H_drift_rel");
  const pd = column(table, "P_drift_rel");
  const orb = column(table, "orb_dist");

  const width = 640;
  const panelH = 300;
  const raster = new Raster(width, 2 * panelH);

  const positive = hd.concat(pd).filter((v) => v > 0);
  const dmin = positive.length ? Math.min(...positive) : 1e-16;
  const dmax = positive.length ? Math.max(...positive) : 1e-6;
  const top = new Figure(
    {
      x: { min: t[0], max: t[t.length - 1] || 1, label: "" },
      y: { min: dmin / 2, max: dmax * 5 || 1e-6, log: true, label: "relative drift" },
      title: "conserved-quantity drift",
      width,
      height: panelH,
      margin: { l: 80, r: 20, t: 36, b: 40 },
    },
    raster,
    0
  );
  top.axes();
  top.polyline(t, hd, "#4361ee", [67, 97, 238]);
  top.polyline(t, pd, "#e63946", [230, 57, 70]);
  top.raw(
    `<text x="${width - 30}" y="46" font-size="11" text-anchor="end" fill="#4361ee">energy</text>` +
      `<text x="${width - 30}" y="60" font-size="11" text-anchor="end" fill="#e63946">momentum</text>`
  );

  const omax = Math.max(...orb, 1e-12);
  const bottom = new Figure(
    {
      x: { min: t[0], max: t[t.length - 1] || 1, label: "t" },
      y: { min: 0, max: 1.15 * omax, label: "orbital distance" },
      title: "distance to the translated reference",
      width,
      height: panelH,
      margin: { l: 80, r: 20, t: 36, b: 46 },
    },
    raster,
    panelH
  );
  bottom.axes();
  bottom.polyline(t, orb, "#2d6a4f", [45, 106, 79]);
  const svg = wrapSvg(width, 2 * panelH, top.svgBody() + "\n" + bottom.svgBody());
  return { svg, png: raster.encode() };
}

export function main(argv: string[]): void {
  const positional: string[] = [];
  let out = "evolve";
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--out") out = argv[++i];
    else positional.push(argv[i]);
  }
  if (positional.length !== 1) throw new Error("expected exactly one CSV path");
  const { svg, png } = renderTimeseries(readFileSync(positional[0], "utf-8"));
  writeFileSync(`${out}.svg`, svg);
  writeFileSync(`${out}.png`, png);
  console.log(`wrote ${out}.svg and ${out}.png`);
}

if (require.main === module) {
  try {
    main(process.argv.slice(2));
  } catch (err) {
    console.error(`render_timeseries failed: ${(err as Error).message}`);
    process.exit(1);
  }
}
