#!/usr/bin/env node
/**
 * twzf-export — encode a tweet JSONL into the TWZF feature binary.
 *
 *   twzf-export export --input tweets.jsonl --model hash:768 --out features.twzf
 *
 * Exit codes: 0 success, 1 usage error, 2 data/encoder error.
 */

import { resolveEncoder } from "./encoders.js";
import { exportFeatures } from "./exporter.js";

interface Args {
  input?: string;
  model: string;
  out?: string;
  batch: number;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { model: "hash:768", batch: 256 };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case "--input":
        args.input = value;
        i++;
        break;
      case "--model":
        args.model = value;
        i++;
        break;
      case "--out":
        args.out = value;
        i++;
        break;
      case "--batch":
        args.batch = Number(value);
        i++;
        break;
      default:
        throw new UsageError(`unknown flag ${flag}`);
    }
  }
  if (!args.input || !args.out) {
    throw new UsageError("required: --input <jsonl> --out <twzf>");
  }
  if (!Number.isInteger(args.batch) || args.batch < 1) {
    throw new UsageError(`--batch must be a positive integer, got ${args.batch}`);
  }
  return args;
}

class UsageError extends Error {}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  try {
    if (command !== "export") {
      throw new UsageError(`unknown command ${command ?? "(none)"}; expected: export`);
    }
    const args = parseArgs(rest);
    const encoder = await resolveEncoder(args.model);
    const manifest = await exportFeatures(args.input!, encoder, args.out!, args.batch);
    process.stdout.write(JSON.stringify(manifest) + "\n");
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`usage error: ${err.message}\n`);
      return 1;
    }
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 2;
  }
}

main().then((code) => {
  process.exitCode = code;
});
