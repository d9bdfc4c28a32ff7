/**
 * Sentence encoders behind one interface.
 *
 * Built-in ids:
 * - `hash:<dim>` — deterministic signed token-hash bag of words,
 *   L2-normalized, float32 output. Needs no weights, so exports are
 *   reproducible on any machine.
 * - `module:<path>` — dynamic import of a JS module exposing
 *   `{ id?, dim, encode(texts: string[]): number[][] | Promise<number[][]> }`,
 *   which is how a real pretrained encoder (e.g. a transformers.js
 *   pipeline wrapper) plugs in.
 */

import { pathToFileURL } from "node:url";
import { createHash } from "node:crypto";

export interface Encoder {
  id: string;
  dim: number;
  encode(texts: string[]): Promise<Float32Array[]>;
}

function tokenHash(token: string): bigint {
  const digest = createHash("sha256").update(token, "utf8").digest();
  return digest.readBigUInt64LE(0);
}

export function hashEncoder(dim: number): Encoder {
  if (!Number.isInteger(dim) || dim < 8) {
    throw new Error(`hash encoder needs an integer dim >= 8, got ${dim}`);
  }
  return {
    id: `hash:${dim}`,
    dim,
    async encode(texts: string[]): Promise<Float32Array[]> {
      return texts.map((text) => {
        const acc = new Float64Array(dim);
        for (const token of text.toLowerCase().split(/\s+/)) {
          if (!token) continue;
          const h = tokenHash(token);
          const index = Number(h % BigInt(dim));
          const sign = (h >> 60n) & 1n ? 1.0 : -1.0;
          acc[index] += sign;
        }
        let norm = 0;
        for (const v of acc) norm += v * v;
        norm = Math.sqrt(norm);
        const out = new Float32Array(dim);
        if (norm > 0) {
          for (let i = 0; i < dim; i++) out[i] = Math.fround(acc[i] / norm);
        }
        return out;
      });
    },
  };
}

interface EncoderModule {
  id?: string;
  dim: number;
  encode(texts: string[]): number[][] | Float32Array[] | Promise<number[][] | Float32Array[]>;
}

export async function moduleEncoder(path: string): Promise<Encoder> {
  let mod: { default?: EncoderModule } & EncoderModule;
  try {
    mod = await import(pathToFileURL(path).href);
  } catch (err) {
    throw new Error(`encoder load failure: ${path}: ${(err as Error).message}`);
  }
  const impl = (mod.default ?? mod) as EncoderModule;
  if (typeof impl.encode !== "function" || !Number.isInteger(impl.dim)) {
    throw new Error(`encoder load failure: ${path} does not expose encode() and dim`);
  }
  return {
    id: impl.id ?? `module:${path}`,
    dim: impl.dim,
    async encode(texts: string[]): Promise<Float32Array[]> {
      const raw = await impl.encode(texts);
      return raw.map((row, i) => {
        if (row.length !== impl.dim) {
          throw new Error(`encoder returned ${row.length} dims for text ${i}, expected ${impl.dim}`);
        }
        return row instanceof Float32Array ? row : Float32Array.from(row);
      });
    },
  };
}

export async function resolveEncoder(modelId: string): Promise<Encoder> {
  if (modelId.startsWith("hash:")) {
    return hashEncoder(Number(modelId.slice(5)));
  }
  if (modelId.startsWith("module:")) {
    return moduleEncoder(modelId.slice(7));
  }
  throw new Error(
    `encoder load failure: unknown model id ${modelId} (use hash:<dim> or module:<path>)`
  );
}
