/**
 * Core export operation: tweet JSONL in, TWZF matrix + manifest out.
 */

import { createHash } from "node:crypto";
import { readFileSync, writeFileSync } from "node:fs";

import { Encoder } from "./encoders.js";
import { serializeMatrix } from "./twzf.js";

export interface ExportManifest {
  model: string;
  dim: number;
  rows: number;
  input_sha256: string;
  created_at: string;
}

export interface ParsedCorpus {
  texts: string[];
  raw: Buffer;
}

const REQUIRED_KEYS = ["tweet_id", "user_id", "posted_at", "text"] as const;

export function readCorpus(path: string): ParsedCorpus {
  const raw = readFileSync(path);
  const texts: string[] = [];
  const lines = raw.toString("utf8").split("\n");
  for (const [index, line] of lines.entries()) {
    if (!line.trim()) continue;
    let record: Record<string, unknown>;
    try {
      record = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${index + 1}: bad JSON: ${(err as Error).message}`);
    }
    for (const key of REQUIRED_KEYS) {
      if (!(key in record)) {
        throw new Error(`${path}:${index + 1}: missing field ${key}`);
      }
    }
    texts.push(String(record.text));
  }
  if (texts.length === 0) {
    throw new Error(`${path}: empty corpus`);
  }
  return { texts, raw };
}

export async function exportFeatures(
  inputPath: string,
  encoder: Encoder,
  outPath: string,
  batchSize = 256
): Promise<ExportManifest> {
  const corpus = readCorpus(inputPath);
  const rows: Float32Array[] = [];
  for (let start = 0; start < corpus.texts.length; start += batchSize) {
    const batch = corpus.texts.slice(start, start + batchSize);
    rows.push(...(await encoder.encode(batch)));
  }
  const matrix = serializeMatrix(rows, encoder.dim);
  writeFileSync(outPath, matrix);
  const manifest: ExportManifest = {
    model: encoder.id,
    dim: encoder.dim,
    rows: rows.length,
    input_sha256: createHash("sha256").update(corpus.raw).digest("hex"),
    created_at: new Date().toISOString(),
  };
  writeFileSync(`${outPath}.manifest.json`, JSON.stringify(manifest, null, 2) + "\n");
  return manifest;
}

/** Recheck a manifest against the JSONL it was produced from. */
export function verifyManifest(manifest: ExportManifest, inputPath: string): void {
  const digest = createHash("sha256").update(readFileSync(inputPath)).digest("hex");
  if (digest !== manifest.input_sha256) {
    throw new Error(
      `manifest checksum mismatch: corpus ${digest} != manifest ${manifest.input_sha256}`
    );
  }
}
