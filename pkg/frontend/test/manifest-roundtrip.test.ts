/** A manifest exported by the Python CLI must build sessions unchanged. */
import { mkdirSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { buildSession, validateManifest } from "../src/session.js";
import type { SessionManifest } from "../src/types.js";

const fixture = path.join(
  path.dirname(fileURLToPath(import.meta.url)),
  "fixtures",
  "cli_export_manifest.json",
);

function loadFixture(): { manifest: SessionManifest; root: string } {
  const manifest = JSON.parse(readFileSync(fixture, "utf-8")) as SessionManifest;
  const root = mkdtempSync(path.join(tmpdir(), "cli-export-"));
  mkdirSync(path.join(root, "audio"), { recursive: true });
  for (const item of manifest.items) {
    for (const file of [item.reference, item.anchor, ...item.systems.map((s) => s.path)]) {
      writeFileSync(path.join(root, file), "riff-placeholder");
    }
  }
  return { manifest, root };
}

describe("CLI export round trip", () => {
  it("validates against the session-manifest schema", () => {
    const { manifest, root } = loadFixture();
    expect(manifest.scale).toBe("0-100");
    expect(() => validateManifest(manifest, root)).not.toThrow();
  });

  it("builds blind trials with systems + reference + anchor", () => {
    const { manifest, root } = loadFixture();
    const { session } = buildSession(manifest, root, "round-trip", 23);
    expect(session.trials).toHaveLength(manifest.items.length);
    for (const trial of session.trials) {
      expect(trial.stimuli).toHaveLength(manifest.items[0].systems.length + 2);
    }
  });
});
