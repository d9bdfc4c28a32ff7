/**
 * TWZF feature-matrix binary.
 *
 * Layout (little-endian):
 * - 4 bytes magic "TWZF"
 * - uint32 version (currently 1)
 * - uint32 rows
 * - uint32 cols
 * - rows * cols float32 values, row-major
 */

export const TWZF_MAGIC = "TWZF";
export const TWZF_VERSION = 1;

export function serializeMatrix(rows: Float32Array[], cols: number): Buffer {
  for (const [i, row] of rows.entries()) {
    if (row.length !== cols) {
      throw new Error(`row ${i} has ${row.length} values, expected ${cols}`);
    }
  }
  const header = Buffer.alloc(16);
  header.write(TWZF_MAGIC, 0, "ascii");
  header.writeUInt32LE(TWZF_VERSION, 4);
  header.writeUInt32LE(rows.length, 8);
  header.writeUInt32LE(cols, 12);
  const body = Buffer.alloc(rows.length * cols * 4);
  const view = new DataView(body.buffer, body.byteOffset, body.byteLength);
  let offset = 0;
  for (const row of rows) {
    for (let j = 0; j < cols; j++) {
      view.setFloat32(offset, row[j], true);
      offset += 4;
    }
  }
  return Buffer.concat([header, body]);
}

export function parseMatrix(buffer: Buffer): { rows: number; cols: number; data: Float32Array } {
  if (buffer.length < 16 || buffer.toString("ascii", 0, 4) !== TWZF_MAGIC) {
    throw new Error("not a TWZF buffer");
  }
  const version = buffer.readUInt32LE(4);
  if (version !== TWZF_VERSION) {
    throw new Error(`unsupported TWZF version ${version}`);
  }
  const rows = buffer.readUInt32LE(8);
  const cols = buffer.readUInt32LE(12);
  const expected = 16 + rows * cols * 4;
  if (buffer.length !== expected) {
    throw new Error(`truncated TWZF body: ${buffer.length} bytes, expected ${expected}`);
  }
  const data = new Float32Array(rows * cols);
  const view = new DataView(buffer.buffer, buffer.byteOffset + 16, rows * cols * 4);
  for (let i = 0; i < data.length; i++) {
    data[i] = view.getFloat32(i * 4, true);
  }
  return { rows, cols, data };
}
