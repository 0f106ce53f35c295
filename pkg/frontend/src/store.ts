/** Append-only JSON-lines rating store and trial-completeness gate. */

import { appendFileSync, existsSync, readFileSync } from "node:fs";

import type { BuiltSession } from "./session.js";
import type { Rating } from "./types.js";

export interface TrialSubmission {
  itemId: string;
  ratings: { label: string; score: number }[];
}

export type SubmitResult =
  | { accepted: true; ratings: Rating[] }
  | { accepted: false; reason: string };

/**
 * Validate one trial's ratings against the session: every stimulus rated,
 * integer scores in [0, 100], no unknown labels. Nothing persists unless the
 * whole trial is acceptable.
 */
export function checkSubmission(
  built: BuiltSession,
  submission: TrialSubmission,
  now: () => string = () => new Date().toISOString(),
): SubmitResult {
  const trial = built.session.trials.find((t) => t.itemId === submission.itemId);
  if (!trial) {
    return { accepted: false, reason: `unknown item ${submission.itemId}` };
  }
  const byLabel = new Map(submission.ratings.map((r) => [r.label, r.score]));
  if (byLabel.size !== submission.ratings.length) {
    return { accepted: false, reason: "duplicate labels in submission" };
  }
  const unrated = trial.stimuli
    .filter((s) => !byLabel.has(s.label))
    .map((s) => s.label);
  if (unrated.length > 0) {
    return { accepted: false, reason: `unrated stimuli: ${unrated.join(", ")}` };
  }
  const unknown = submission.ratings
    .filter((r) => !trial.stimuli.some((s) => s.label === r.label))
    .map((r) => r.label);
  if (unknown.length > 0) {
    return { accepted: false, reason: `unknown labels: ${unknown.join(", ")}` };
  }
  for (const { label, score } of submission.ratings) {
    if (!Number.isInteger(score) || score < 0 || score > 100) {
      return { accepted: false, reason: `score for ${label} must be an integer in 0..100, got ${score}` };
    }
  }
  const stamp = now();
  const ratings: Rating[] = trial.stimuli.map((stim) => {
    const secret = built.secrets.get(stim.token);
    if (!secret) throw new Error(`session corrupt: no secret for token ${stim.token}`);
    return {
      raterId: built.session.raterId,
      itemId: trial.itemId,
      label: stim.label,
      kind: secret.kind,
      system: secret.system,
      score: byLabel.get(stim.label)!,
      timestamp: stamp,
    };
  });
  return { accepted: true, ratings };
}

export class RatingStore {
  constructor(private readonly filePath: string) {}

  /** One atomic line per rating; lines are never rewritten. */
  append(ratings: Rating[]): void {
    const lines = ratings.map((r) => JSON.stringify(r) + "\n").join("");
    appendFileSync(this.filePath, lines, "utf-8");
  }

  readAll(): Rating[] {
    if (!existsSync(this.filePath)) return [];
    return readFileSync(this.filePath, "utf-8")
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as Rating);
  }
}
