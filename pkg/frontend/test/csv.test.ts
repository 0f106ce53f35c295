import { describe, expect, it } from "vitest";

import { csvField, parseRatingsCsv, ratingsToCsv } from "../src/csv.js";
import { aggregateScores } from "../src/stats.js";
import type { Rating } from "../src/types.js";

function sample(n: number): Rating[] {
  return Array.from({ length: n }, (_, i) => ({
    raterId: `rater,${i}`, // comma forces quoting
    itemId: `item_${i % 2}`,
    label: "AB"[i % 2],
    kind: i % 3 === 0 ? "hidden_reference" : "system",
    system: i % 3 === 0 ? null : "ours",
    score: 50 + i,
    timestamp: `2026-01-0${(i % 9) + 1}T00:00:00Z`,
  })) as Rating[];
}

describe("csv export", () => {
  it("empty ratings produce a header-only block", () => {
    const text = ratingsToCsv([], []);
    const lines = text.split("\r\n");
    expect(lines[0]).toBe("rater_id,item_id,label,kind,system,score,timestamp");
    expect(lines[1]).toBe("");
  });

  it("round trips through the parser", () => {
    const ratings = sample(6);
    const parsed = parseRatingsCsv(ratingsToCsv(ratings, aggregateScores(ratings)));
    expect(parsed).toEqual(ratings);
  });

  it("quotes fields per RFC 4180", () => {
    expect(csvField("plain")).toBe("plain");
    expect(csvField("a,b")).toBe('"a,b"');
    expect(csvField('say "hi"')).toBe('"say ""hi"""');
    expect(csvField("line\nbreak")).toBe('"line\nbreak"');
  });

  it("summary block means equal aggregate output", () => {
    const ratings = sample(9);
    const scores = aggregateScores(ratings);
    const text = ratingsToCsv(ratings, scores);
    const summary = text.split("system,mean,ci95,n\r\n")[1].trim().split("\r\n");
    expect(summary).toHaveLength(scores.length);
    for (let i = 0; i < scores.length; i++) {
      const cols = summary[i].split(",");
      expect(Number(cols[1])).toBeCloseTo(scores[i].mean, 6);
    }
  });
});
