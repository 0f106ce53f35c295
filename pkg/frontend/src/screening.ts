/** Post-screening of raters on their hidden-reference scores. */

import type { Rating, ScreeningResult } from "./types.js";

export interface ScreeningRule {
  minReferenceScore: number; // a hidden-reference rating below this is a miss
  maxMissFraction: number; // excluded when misses / trials exceeds this
}

/** BS.1534-style default: reference rated < 90 in more than 15% of trials. */
export const DEFAULT_RULE: ScreeningRule = {
  minReferenceScore: 90,
  maxMissFraction: 0.15,
};

export function screenRaters(
  ratings: readonly Rating[],
  rule: ScreeningRule = DEFAULT_RULE,
): ScreeningResult {
  const perRater = new Map<string, { trials: number; misses: number }>();
  for (const rating of ratings) {
    if (rating.kind !== "hidden_reference") continue;
    const entry = perRater.get(rating.raterId) ?? { trials: 0, misses: 0 };
    entry.trials += 1;
    if (rating.score < rule.minReferenceScore) entry.misses += 1;
    perRater.set(rating.raterId, entry);
  }
  const retained: string[] = [];
  const excluded: { raterId: string; reason: string }[] = [];
  for (const [raterId, { trials, misses }] of [...perRater.entries()].sort()) {
    const fraction = misses / trials;
    // strict inequality: exactly at the threshold is retained
    if (fraction > rule.maxMissFraction) {
      excluded.push({
        raterId,
        reason:
          `scored the hidden reference below ${rule.minReferenceScore} in ` +
          `${misses}/${trials} trials (${(fraction * 100).toFixed(1)}% > ` +
          `${(rule.maxMissFraction * 100).toFixed(0)}%)`,
      });
    } else {
      retained.push(raterId);
    }
  }
  return { retained, excluded };
}

/** Keep only ratings from retained raters. */
export function applyScreening(
  ratings: readonly Rating[],
  result: ScreeningResult,
): Rating[] {
  const keep = new Set(result.retained);
  return ratings.filter((r) => keep.has(r.raterId));
}
