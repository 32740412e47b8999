/**
 * WSF1 field heatmap with a symmetric diverging color scale about zero and
 * axes in the physical units carried by the header.
 *
 * Usage: node dist/src/render_field.js <field.wsf1> --out <basename>
 */

import { readFileSync, writeFileSync } from "node:fs";
import { Raster, RGB } from "./png";
import { fmt, niceTicks, wrapSvg } from "./chart";
import { Field, fieldMinMax, parseWsf1 } from "./wsf1";

/** Blue-white-red diverging map on t in [-1, 1]. */
export function diverging(t: number): RGB {
  const clamp = (v: number) => Math.max(0, Math.min(255, Math.round(v)));
  if (t < 0) {
    const s = Math.min(1, -t);
    return [clamp(255 * (1 - s) + 33 * s), clamp(255 * (1 - s) + 102 * s), 255];
  }
  const s = Math.min(1, t);
  return [255, clamp(255 * (1 - s) + 57 * s), clamp(255 * (1 - s) + 41 * s)];
}

export function renderField(field: Field): { svg: string; png: Buffer } {
  const { nx, ny, Lx, Ly } = field;
  const mm = fieldMinMax(field);
  const vmax = Math.max(Math.abs(mm.min), Math.abs(mm.max), 1e-300);

  const margin = { l: 70, r: 20, t: 30, b: 50 };
  const plotW = 480;
  const plotH = 480;
  const width = margin.l + plotW + margin.r;
  const height = margin.t + plotH + margin.b;
  const raster = new Raster(width, height);
  const black: RGB = [40, 40, 40];

  // pixel image: rows flipped so the top of the figure is x2 = +Ly
  const cellW = plotW / nx;
  const cellH = plotH / ny;
  for (let iy = 0; iy < ny; iy++) {
    for (let ix = 0; ix < nx; ix++) {
      const v = field.values[iy][ix] / vmax;
      const c = diverging(v);
      const x0 = margin.l + Math.floor(ix * cellW);
      const y0 = margin.t + Math.floor((ny - 1 - iy) * cellH);
      raster.rect(x0, y0, Math.ceil(cellW), Math.ceil(cellH), c);
    }
  }
  raster.line(margin.l, margin.t, margin.l + plotW, margin.t, black);
  raster.line(margin.l, margin.t + plotH, margin.l + plotW, margin.t + plotH, black);
  raster.line(margin.l, margin.t, margin.l, margin.t + plotH, black);
  raster.line(margin.l + plotW, margin.t, margin.l + plotW, margin.t + plotH, black);

  // the SVG embeds the same raster as a data URI (cell-exact, compact)
  const imgPng = (() => {
    const img = new Raster(nx, ny);
    for (let iy = 0; iy < ny; iy++) {
      for (let ix = 0; ix < nx; ix++) {
        img.set(ix, ny - 1 - iy, diverging(field.values[iy][ix] / vmax));
      }
    }
    return img.encode();
  })();

  const parts: string[] = [];
  parts.push(
    `<image x="${margin.l}" y="${margin.t}" width="${plotW}" height="${plotH}" ` +
      `preserveAspectRatio="none" style="image-rendering:pixelated" ` +
      `href="data:image/png;base64,${imgPng.toString("base64")}"/>`
  );
  parts.push(
    `<rect x="${margin.l}" y="${margin.t}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333"/>`
  );
  for (const v of niceTicks(-Lx, Lx, 7)) {
    const px = margin.l + ((v + Lx) / (2 * Lx)) * plotW;
    parts.push(
      `<line x1="${px}" y1="${margin.t + plotH}" x2="${px}" y2="${margin.t + plotH + 5}" stroke="#333"/>` +
        `<text x="${px}" y="${margin.t + plotH + 18}" font-size="11" text-anchor="middle">${fmt(v)}</text>`
    );
    raster.line(px, margin.t + plotH, px, margin.t + plotH + 4, black);
    raster.text(px - 3 * fmt(v).length, margin.t + plotH + 7, fmt(v), black);
  }
  for (const v of niceTicks(-Ly, Ly, 7)) {
    const py = margin.t + plotH - ((v + Ly) / (2 * Ly)) * plotH;
    parts.push(
      `<line x1="${margin.l - 5}" y1="${py}" x2="${margin.l}" y2="${py}" stroke="#333"/>` +
        `<text x="${margin.l - 8}" y="${py + 4}" font-size="11" text-anchor="end">${fmt(v)}</text>`
    );
    raster.line(margin.l - 4, py, margin.l, py, black);
    raster.text(margin.l - 6 - 6 * fmt(v).length, py - 3, fmt(v), black);
  }
  parts.push(
    `<text x="${margin.l + plotW / 2}" y="${height - 12}" font-size="12" text-anchor="middle">x1</text>`,
    `<text x="18" y="${margin.t + plotH / 2}" font-size="12" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${margin.t + plotH / 2})">x2</text>`,
    `<text x="${margin.l + plotW / 2}" y="${margin.t - 10}" font-size="12" text-anchor="middle">` +
      `field (symmetric scale, max |v| = ${vmax.toPrecision(4)})</text>`
  );
  return { svg: wrapSvg(width, height, parts.join("\n")), png: raster.encode() };
}

export function main(argv: string[]): void {
  const positional: string[] = [];
  let out = "field";
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--out") out = argv[++i];
    else positional.push(argv[i]);
  }
  if (positional.length !== 1) throw new Error("expected exactly one WSF1 path");
  const field = parseWsf1(readFileSync(positional[0]));
  const { svg, png } = renderField(field);
  writeFileSync(`${out}.svg`, svg);
  writeFileSync(`${out}.png`, png);
  console.log(`wrote ${out}.svg and ${out}.png`);
}

if (require.main === module) {
  try {
    main(process.argv.slice(2));
  } catch (err) {
    console.error(`render_field failed: ${(err as Error).message}`);
    process.exit(1);
  }
}
