/** Shared shapes for the listening-test harness. */

/** Input manifest produced by the CLI's mushra-export command. */
export interface SessionManifest {
  items: ManifestItem[];
  scale: string; // "0-100"
}

export interface ManifestItem {
  id: string;
  reference: string; // path relative to the manifest's directory
  anchor: string;
  systems: { name: string; path: string }[];
}

export type StimulusKind = "hidden_reference" | "anchor" | "system";

/** Server-side stimulus record; never sent to the rater. */
export interface StimulusSecret {
  token: string;
  kind: StimulusKind;
  system: string | null; // system name for kind === "system"
  path: string;
}

/** Blind view served to the rater: opaque tokens only. */
export interface BlindTrial {
  itemId: string;
  referenceToken: string; // open reference player
  stimuli: { label: string; token: string }[];
}

export interface Session {
  sessionId: string;
  raterId: string;
  seed: number;
  trials: BlindTrial[];
}

/** One slider value; stored append-only after a trial is accepted. */
export interface Rating {
  raterId: string;
  itemId: string;
  label: string; // blind label the rater saw
  kind: StimulusKind;
  system: string | null;
  score: number; // integer 0..100
  timestamp: string;
}

export interface SystemScore {
  system: string; // "reference", "anchor", or a system name
  mean: number;
  ci95: number | null; // undefined below n = 2
  n: number;
}

export interface ScreeningResult {
  retained: string[];
  excluded: { raterId: string; reason: string }[];
}
