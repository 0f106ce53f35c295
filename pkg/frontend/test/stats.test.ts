import { describe, expect, it } from "vitest";

import { aggregateScores, ci95, formatScore, mean, sampleStd, studentQuantile } from "../src/stats.js";
import type { Rating } from "../src/types.js";

// reference quantiles computed with an independent statistics library
const T_TABLE: [number, number][] = [
  [1, 12.706204736432095],
  [2, 4.302652729696142],
  [4, 2.7764451051977987],
  [9, 2.2621571628540993],
  [29, 2.045229642132703],
];

function rating(system: string, score: number, rater = "r1"): Rating {
  return {
    raterId: rater,
    itemId: "item",
    label: "A",
    kind: system === "reference" ? "hidden_reference" : system === "anchor" ? "anchor" : "system",
    system: system === "reference" || system === "anchor" ? null : system,
    score,
    timestamp: "2026-01-01T00:00:00Z",
  };
}

describe("studentQuantile", () => {
  it("matches reference values to 1e-9", () => {
    for (const [df, expected] of T_TABLE) {
      expect(Math.abs(studentQuantile(0.975, df) - expected)).toBeLessThan(1e-9);
    }
  });

  it("is antisymmetric around the median", () => {
    expect(studentQuantile(0.5, 7)).toBe(0);
    expect(studentQuantile(0.025, 7)).toBeCloseTo(-studentQuantile(0.975, 7), 12);
  });

  it("rejects invalid arguments", () => {
    expect(() => studentQuantile(0, 3)).toThrow();
    expect(() => studentQuantile(0.5, 0)).toThrow();
  });
});

describe("ci95", () => {
  it("handbook case {80,90,100}", () => {
    const expected = (4.302652729696142 * 10) / Math.sqrt(3);
    expect(ci95([80, 90, 100])!).toBeCloseTo(expected, 9);
  });

  it("null below two samples", () => {
    expect(ci95([55])).toBeNull();
  });

  it("zero for constant samples", () => {
    expect(ci95([100, 100, 100])).toBe(0);
  });
});

describe("aggregateScores", () => {
  it("groups reference, anchor, and systems", () => {
    const ratings = [
      rating("reference", 100),
      rating("reference", 95, "r2"),
      rating("anchor", 40),
      rating("ours", 85),
      rating("ours", 90, "r2"),
    ];
    const scores = aggregateScores(ratings);
    const bySystem = new Map(scores.map((s) => [s.system, s]));
    expect(bySystem.get("reference")!.mean).toBe(97.5);
    expect(bySystem.get("anchor")!.n).toBe(1);
    expect(bySystem.get("anchor")!.ci95).toBeNull();
    expect(bySystem.get("ours")!.mean).toBe(87.5);
  });

  it("matches an independent oracle on random rating sets", () => {
    // fixed dfs with table quantiles so the oracle shares no code with ci95
    const sizes = [3, 5, 10, 30];
    const tFor: Record<number, number> = { 3: 4.302652729696142, 5: 2.7764451051977987, 10: 2.2621571628540993, 30: 2.045229642132703 };
    let seed = 12345;
    const rand = () => {
      seed = (seed * 1103515245 + 12345) % 2147483648;
      return seed / 2147483648;
    };
    for (const n of sizes) {
      const values = Array.from({ length: n }, () => Math.floor(rand() * 101));
      const ratings = values.map((v, i) => rating("sys", v, `r${i}`));
      const [score] = aggregateScores(ratings);
      const m = values.reduce((a, b) => a + b, 0) / n;
      const sd = Math.sqrt(values.reduce((a, b) => a + (b - m) ** 2, 0) / (n - 1));
      const expected = (tFor[n] * sd) / Math.sqrt(n);
      expect(Math.abs(score.mean - m)).toBeLessThan(1e-9);
      expect(Math.abs(score.ci95! - expected)).toBeLessThan(1e-9);
    }
  });

  it("formats like the results tables", () => {
    const [score] = aggregateScores([rating("ours", 95), rating("ours", 97, "r2")]);
    expect(formatScore(score)).toMatch(/^96\.00 ± \d+\.\d{2}$/);
  });
});

describe("helpers", () => {
  it("mean and sample std", () => {
    expect(mean([1, 2, 3])).toBe(2);
    expect(sampleStd([80, 90, 100])).toBeCloseTo(10, 12);
  });
});
