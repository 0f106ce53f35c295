/** CLI entry: serve a listening test from an exported session manifest. */

import path from "node:path";
import { fileURLToPath } from "node:url";

import { createHarness } from "./server.js";

function arg(name: string, fallback: string): string {
  const index = process.argv.indexOf(`--${name}`);
  return index >= 0 && process.argv[index + 1] ? process.argv[index + 1] : fallback;
}

const manifestPath = arg("manifest", "session_manifest.json");
const port = Number(arg("port", "8330"));
const seed = Number(arg("seed", "1"));
const ratingsPath = arg("out", "ratings.jsonl");
const publicDir = path.join(path.dirname(fileURLToPath(import.meta.url)), "..", "public");

const { app } = createHarness({ manifestPath, ratingsPath, seed, publicDir });
app.listen(port, () => {
  console.log(`listening test at http://localhost:${port}/?rater=<id>`);
  console.log(`manifest: ${manifestPath}; ratings appended to ${ratingsPath}`);
});
