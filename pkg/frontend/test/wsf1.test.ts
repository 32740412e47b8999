import { test } from "node:test";
import assert from "node:assert/strict";
import { fieldMinMax, parseWsf1 } from "../src/wsf1";

function makeWsf1(nx: number, ny: number, fill: (ix: number, iy: number) => number): Buffer {
  const head = Buffer.from(`WSF1 ${nx} ${ny} 3.0 5.0\n`, "ascii");
  const body = Buffer.alloc(nx * ny * 8);
  for (let iy = 0; iy < ny; iy++) {
    for (let ix = 0; ix < nx; ix++) {
      body.writeDoubleLE(fill(ix, iy), (iy * nx + ix) * 8);
    }
  }
  return Buffer.concat([head, body]);
}

test("round trip of a synthetic field", () => {
  const buf = makeWsf1(4, 3, (ix, iy) => ix - 2 * iy);
  const f = parseWsf1(buf);
  assert.equal(f.nx, 4);
  assert.equal(f.ny, 3);
  assert.equal(f.Lx, 3.0);
  assert.equal(f.Ly, 5.0);
  assert.equal(f.values[2][1], 1 - 4);
  assert.deepEqual(fieldMinMax(f), { min: -4, max: 3 });
});

test("truncated payload reported with offset", () => {
  const buf = makeWsf1(4, 3, () => 0).subarray(0, 40);
  assert.throws(() => parseWsf1(buf), /offset/);
});

test("bad magic rejected", () => {
  assert.throws(
    () => parseWsf1(Buffer.from("NOPE 2 2 1 1\n" + "0".repeat(32), "ascii")),
    /malformed header/
  );
});
