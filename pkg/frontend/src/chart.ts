/**
 * Shared SVG + raster chart scaffolding: margins, linear/log axes with
 * tick labels, polylines, scatter markers, reference lines.  Every figure
 * is emitted in both formats from the same geometry.
 */

import { Raster, RGB } from "./png";

export interface Axis {
  min: number;
  max: number;
  log?: boolean;
  label?: string;
}

export interface Panel {
  x: Axis;
  y: Axis;
  title?: string;
  width: number;
  height: number;
  margin: { l: number; r: number; t: number; b: number };
}

export function niceTicks(min: number, max: number, n = 6): number[] {
  if (!(max > min)) return [min];
  const span = max - min;
  const step0 = span / Math.max(n - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((c) => c * mag);
  const step = candidates.find((c) => span / c <= n) ?? candidates[4];
  const first = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= max + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

export function logTicks(min: number, max: number): number[] {
  const lo = Math.ceil(Math.log10(min));
  const hi = Math.floor(Math.log10(max));
  const ticks: number[] = [];
  for (let d = lo; d <= hi; d++) ticks.push(Math.pow(10, d));
  return ticks.length > 0 ? ticks : [min, max];
}

export function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(0).replace("e+", "e").replace("e-", "e-");
  }
  const s = v.toPrecision(4);
  return String(Number(s));
}

export class Figure {
  readonly panel: Panel;
  private svgParts: string[] = [];
  readonly raster: Raster;

  constructor(panel: Panel, raster?: Raster, offsetY = 0) {
    this.panel = panel;
    this.raster = raster ?? new Raster(panel.width, panel.height);
    this.offsetY = offsetY;
  }

  private offsetY: number;

  get plotBox(): { x0: number; y0: number; x1: number; y1: number } {
    const m = this.panel.margin;
    return {
      x0: m.l,
      y0: this.offsetY + m.t,
      x1: this.panel.width - m.r,
      y1: this.offsetY + this.panel.height - m.b,
    };
  }

  px(v: number): number {
    const { x0, x1 } = this.plotBox;
    const a = this.panel.x;
    const t = a.log
      ? (Math.log10(v) - Math.log10(a.min)) / (Math.log10(a.max) - Math.log10(a.min))
      : (v - a.min) / (a.max - a.min);
    return x0 + t * (x1 - x0);
  }

  py(v: number): number {
    const { y0, y1 } = this.plotBox;
    const a = this.panel.y;
    const t = a.log
      ? (Math.log10(v) - Math.log10(a.min)) / (Math.log10(a.max) - Math.log10(a.min))
      : (v - a.min) / (a.max - a.min);
    return y1 - t * (y1 - y0);
  }

  axes(): void {
    const { x0, y0, x1, y1 } = this.plotBox;
    this.svgParts.push(
      `<rect x="${x0}" y="${y0}" width="${x1 - x0}" height="${y1 - y0}" ` +
        `fill="none" stroke="#333" stroke-width="1"/>`
    );
    const black: RGB = [40, 40, 40];
    this.raster.line(x0, y0, x1, y0, black);
    this.raster.line(x0, y1, x1, y1, black);
    this.raster.line(x0, y0, x0, y1, black);
    this.raster.line(x1, y0, x1, y1, black);

    const xt = this.panel.x.log
      ? logTicks(this.panel.x.min, this.panel.x.max)
      : niceTicks(this.panel.x.min, this.panel.x.max);
    for (const v of xt) {
      const px = this.px(v);
      this.svgParts.push(
        `<line x1="${px}" y1="${y1}" x2="${px}" y2="${y1 + 5}" stroke="#333"/>` +
          `<text x="${px}" y="${y1 + 18}" font-size="11" text-anchor="middle">${fmt(v)}</text>`
      );
      this.raster.line(px, y1, px, y1 + 4, black);
      this.raster.text(px - 3 * fmt(v).length, y1 + 7, fmt(v), black);
    }
    const yt = this.panel.y.log
      ? logTicks(this.panel.y.min, this.panel.y.max)
      : niceTicks(this.panel.y.min, this.panel.y.max);
    for (const v of yt) {
      const py = this.py(v);
      this.svgParts.push(
        `<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="#333"/>` +
          `<text x="${x0 - 8}" y="${py + 4}" font-size="11" text-anchor="end">${fmt(v)}</text>`
      );
      this.raster.line(x0 - 4, py, x0, py, black);
      this.raster.text(x0 - 6 - 6 * fmt(v).length, py - 3, fmt(v), black);
    }
    if (this.panel.x.label) {
      this.svgParts.push(
        `<text x="${(x0 + x1) / 2}" y="${y1 + 34}" font-size="12" text-anchor="middle">${this.panel.x.label}</text>`
      );
    }
    if (this.panel.y.label) {
      this.svgParts.push(
        `<text x="${x0 - 42}" y="${(y0 + y1) / 2}" font-size="12" text-anchor="middle" ` +
          `transform="rotate(-90 ${x0 - 42} ${(y0 + y1) / 2})">${this.panel.y.label}</text>`
      );
    }
    if (this.panel.title) {
      this.svgParts.push(
        `<text x="${(x0 + x1) / 2}" y="${y0 - 8}" font-size="13" font-weight="bold" ` +
          `text-anchor="middle">${this.panel.title}</text>`
      );
    }
  }

  polyline(xs: number[], ys: number[], color: string, rgb: RGB, width = 1.5): void {
    const pts: string[] = [];
    let prev: [number, number] | null = null;
    for (let i = 0; i < xs.length; i++) {
      if (this.panel.y.log && ys[i] <= 0) {
        prev = null;
        continue;
      }
      const px = this.px(xs[i]);
      const py = this.py(ys[i]);
      pts.push(`${px.toFixed(2)},${py.toFixed(2)}`);
      if (prev) this.raster.line(prev[0], prev[1], px, py, rgb);
      prev = [px, py];
    }
    this.svgParts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${color}" stroke-width="${width}"/>`
    );
  }

  scatter(xs: number[], ys: number[], color: string, rgb: RGB, r = 4): void {
    for (let i = 0; i < xs.length; i++) {
      const px = this.px(xs[i]);
      const py = this.py(ys[i]);
      this.svgParts.push(
        `<circle cx="${px.toFixed(2)}" cy="${py.toFixed(2)}" r="${r}" fill="${color}"/>`
      );
      this.raster.disc(px, py, r, rgb);
    }
  }

  vline(x: number, color: string, rgb: RGB, label?: string): void {
    const { y0, y1 } = this.plotBox;
    const px = this.px(x);
    this.svgParts.push(
      `<line x1="${px}" y1="${y0}" x2="${px}" y2="${y1}" stroke="${color}" ` +
        `stroke-width="1.5" stroke-dasharray="6,3"/>`
    );
    for (let y = y0; y < y1; y += 4) this.raster.line(px, y, px, y + 1, rgb);
    if (label) {
      this.svgParts.push(
        `<text x="${px + 4}" y="${y0 + 14}" font-size="11" fill="${color}">${label}</text>`
      );
    }
  }

  hline(y: number, color: string, rgb: RGB, label?: string): void {
    const { x0, x1 } = this.plotBox;
    const py = this.py(y);
    this.svgParts.push(
      `<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="${color}" ` +
        `stroke-width="1" stroke-dasharray="4,4"/>`
    );
    for (let x = x0; x < x1; x += 4) this.raster.line(x, py, x + 1, py, rgb);
    if (label) {
      this.svgParts.push(
        `<text x="${x1 - 4}" y="${py - 4}" font-size="10" text-anchor="end" fill="${color}">${label}</text>`
      );
    }
  }

  raw(svg: string): void {
    this.svgParts.push(svg);
  }

  svgBody(): string {
    return this.svgParts.join("\n");
  }
}

export function wrapSvg(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n${body}\n</svg>\n`
  );
}
