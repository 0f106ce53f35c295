/** Session construction: seeded blinding of reference/anchor/system stimuli. */

import { existsSync } from "node:fs";
import path from "node:path";

import { hashString, mulberry32, randomToken, shuffled } from "./rng.js";
import type {
  BlindTrial,
  ManifestItem,
  Session,
  SessionManifest,
  StimulusSecret,
} from "./types.js";

export interface BuiltSession {
  session: Session; // the blind view served to the rater
  secrets: Map<string, StimulusSecret>; // token -> identity, server-side only
}

export function validateManifest(manifest: SessionManifest, rootDir: string): void {
  if (!Array.isArray(manifest.items) || manifest.items.length === 0) {
    throw new Error("manifest has no items");
  }
  if (manifest.scale !== "0-100") {
    throw new Error(`manifest scale must be "0-100", got ${JSON.stringify(manifest.scale)}`);
  }
  const missing: string[] = [];
  for (const item of manifest.items) {
    if (!item.reference) throw new Error(`item ${item.id} lacks a reference`);
    if (!item.anchor) throw new Error(`item ${item.id} lacks an anchor`);
    for (const file of [item.reference, item.anchor, ...item.systems.map((s) => s.path)]) {
      if (!existsSync(path.join(rootDir, file))) missing.push(file);
    }
  }
  if (missing.length > 0) {
    throw new Error(`manifest references missing audio files: ${missing.join(", ")}`);
  }
}

function trialStimuli(item: ManifestItem): Omit<StimulusSecret, "token">[] {
  return [
    { kind: "hidden_reference", system: null, path: item.reference },
    { kind: "anchor", system: null, path: item.anchor },
    ...item.systems.map((s) => ({
      kind: "system" as const,
      system: s.name,
      path: s.path,
    })),
  ];
}

/**
 * Build a blinded session for one rater. The stimulus order inside each trial
 * is a seeded random permutation, labels are positional letters, and tokens
 * come from the PRNG stream, so nothing served to the browser identifies the
 * hidden reference, the anchor, or any system.
 */
export function buildSession(
  manifest: SessionManifest,
  rootDir: string,
  raterId: string,
  seed: number,
): BuiltSession {
  validateManifest(manifest, rootDir);
  const rand = mulberry32((seed ^ hashString(raterId)) >>> 0);
  const secrets = new Map<string, StimulusSecret>();
  const trials: BlindTrial[] = manifest.items.map((item) => {
    const withTokens = trialStimuli(item).map((stim) => {
      const token = randomToken(rand);
      const secret: StimulusSecret = { token, ...stim };
      secrets.set(token, secret);
      return secret;
    });
    const referenceToken = randomToken(rand);
    secrets.set(referenceToken, {
      token: referenceToken,
      kind: "hidden_reference",
      system: null,
      path: item.reference,
    });
    const order = shuffled(withTokens, rand);
    return {
      itemId: item.id,
      referenceToken,
      stimuli: order.map((stim, index) => ({
        label: String.fromCharCode(65 + index), // A, B, C, ...
        token: stim.token,
      })),
    };
  });
  return {
    session: {
      sessionId: randomToken(rand, 24),
      raterId,
      seed,
      trials,
    },
    secrets,
  };
}
