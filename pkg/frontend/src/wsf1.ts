/**
 * WSF1 field file reader: text header `WSF1 nx ny Lx Ly` followed by
 * nx*ny little-endian float64 samples, row-major with x2 outer.
 */

export interface Field {
  nx: number;
  ny: number;
  Lx: number;
  Ly: number;
  /** values[iy][ix], iy indexing x2 from -Ly, ix indexing x1 from -Lx */
  values: Float64Array[];
}

export function parseWsf1(buf: Buffer): Field {
  const nl = buf.indexOf(0x0a);
  if (nl < 0) {
    throw new Error("WSF1: no header line terminator found");
  }
  const head = buf.subarray(0, nl).toString("ascii").trim().split(/\s+/);
  if (head.length !== 5 || head[0] !== "WSF1") {
    throw new Error(`WSF1: malformed header '${head.join(" ")}'`);
  }
  const nx = Number(head[1]);
  const ny = Number(head[2]);
  const Lx = Number(head[3]);
  const Ly = Number(head[4]);
  if (!Number.isInteger(nx) || !Number.isInteger(ny) || nx <= 0 || ny <= 0) {
    throw new Error(`WSF1: bad grid sizes ${head[1]} x ${head[2]}`);
  }
  const payload = buf.subarray(nl + 1);
  const expected = nx * ny * 8;
  if (payload.length !== expected) {
    throw new Error(
      `WSF1: payload is ${payload.length} bytes at offset ${nl + 1}, ` +
        `expected ${expected}`
    );
  }
  const values: Float64Array[] = [];
  for (let iy = 0; iy < ny; iy++) {
    const row = new Float64Array(nx);
    for (let ix = 0; ix < nx; ix++) {
      row[ix] = payload.readDoubleLE((iy * nx + ix) * 8);
    }
    values.push(row);
  }
  return { nx, ny, Lx, Ly, values };
}

export function fieldMinMax(f: Field): { min: number; max: number } {
  let min = Infinity;
  let max = -Infinity;
  for (const row of f.values) {
    for (const v of row) {
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  return { min, max };
}
