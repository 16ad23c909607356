import { readFileSync, readdirSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const TESTDATA = join(dirname(fileURLToPath(import.meta.url)), "..", "testdata");

export function goldenNames(): string[] {
  return readdirSync(TESTDATA)
    .filter((name) => name.endsWith(".json"))
    .sort();
}

export function readGolden(name: string): unknown {
  return JSON.parse(readFileSync(join(TESTDATA, name), "utf-8"));
}
