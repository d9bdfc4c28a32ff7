import { describe, expect, it } from "vitest";

import { parseMatrix, serializeMatrix } from "../src/twzf.js";

describe("TWZF serialization", () => {
  it("writes the exact documented byte layout", () => {
    const rows = [Float32Array.from([1.5, -2.25]), Float32Array.from([0.0, 3.0])];
    const buffer = serializeMatrix(rows, 2);
    expect(buffer.toString("ascii", 0, 4)).toBe("TWZF");
    expect(buffer.readUInt32LE(4)).toBe(1); // version
    expect(buffer.readUInt32LE(8)).toBe(2); // rows
    expect(buffer.readUInt32LE(12)).toBe(2); // cols
    expect(buffer.length).toBe(16 + 4 * 4);
    expect(buffer.readFloatLE(16)).toBe(1.5);
    expect(buffer.readFloatLE(20)).toBe(-2.25);
    expect(buffer.readFloatLE(24)).toBe(0.0);
    expect(buffer.readFloatLE(28)).toBe(3.0);
  });

  it("round trips bit-exactly", () => {
    const rows = [
      Float32Array.from([0.1, 0.2, 0.3]),
      Float32Array.from([-1e-7, 1e7, Math.fround(Math.PI)]),
    ];
    const parsed = parseMatrix(serializeMatrix(rows, 3));
    expect(parsed.rows).toBe(2);
    expect(parsed.cols).toBe(3);
    expect(Array.from(parsed.data)).toEqual([...rows[0], ...rows[1]]);
  });

  it("rejects ragged rows and foreign buffers", () => {
    expect(() => serializeMatrix([Float32Array.from([1]), Float32Array.from([1, 2])], 1)).toThrow(
      /row 1/
    );
    expect(() => parseMatrix(Buffer.from("nope"))).toThrow(/TWZF/);
    const good = serializeMatrix([Float32Array.from([1])], 1);
    expect(() => parseMatrix(good.subarray(0, good.length - 1))).toThrow(/truncated/);
  });
});
