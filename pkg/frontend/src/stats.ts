/** Mean / CI statistics, including a self-contained Student-t quantile. */

import type { Rating, SystemScore } from "./types.js";

/** Regularized incomplete beta function I_x(a, b) via continued fraction. */
export function incompleteBeta(x: number, a: number, b: number): number {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const lnBeta =
    logGamma(a) + logGamma(b) - logGamma(a + b);
  const front = Math.exp(a * Math.log(x) + b * Math.log(1 - x) - lnBeta);
  // symmetry keeps the continued fraction in its fast-converging region
  if (x > (a + 1) / (a + b + 2)) {
    return 1 - incompleteBeta(1 - x, b, a);
  }
  return (front * betacf(x, a, b)) / a;
}

function betacf(x: number, a: number, b: number): number {
  const EPS = 1e-15;
  const TINY = 1e-300;
  let c = 1;
  let d = 1 - ((a + b) * x) / (a + 1);
  if (Math.abs(d) < TINY) d = TINY;
  d = 1 / d;
  let result = d;
  for (let m = 1; m <= 300; m++) {
    const m2 = 2 * m;
    let num = (m * (b - m) * x) / ((a + m2 - 1) * (a + m2));
    d = 1 + num * d;
    if (Math.abs(d) < TINY) d = TINY;
    c = 1 + num / c;
    if (Math.abs(c) < TINY) c = TINY;
    d = 1 / d;
    result *= d * c;
    num = (-(a + m) * (a + b + m) * x) / ((a + m2) * (a + m2 + 1));
    d = 1 + num * d;
    if (Math.abs(d) < TINY) d = TINY;
    c = 1 + num / c;
    if (Math.abs(c) < TINY) c = TINY;
    d = 1 / d;
    const delta = d * c;
    result *= delta;
    if (Math.abs(delta - 1) < EPS) break;
  }
  return result;
}

function logGamma(z: number): number {
  // Lanczos-Godfrey, g = 607/128: ~1e-15 relative, enough for 1e-9 quantiles
  const g = 607 / 128;
  const coeffs = [
    0.99999999999999709182,
    57.156235665862923517, -59.597960355475491248, 14.136097974741747174,
    -0.49191381609762019978, 0.33994649984811888699e-4, 0.46523628927048575665e-4,
    -0.98374475304879564677e-4, 0.15808870322491248884e-3, -0.21026444172410488319e-3,
    0.21743961811521264320e-3, -0.16431810653676389022e-3, 0.84418223983852743293e-4,
    -0.26190838401581408670e-4, 0.36899182659531622704e-5,
  ];
  if (z < 0.5) {
    return Math.log(Math.PI / Math.sin(Math.PI * z)) - logGamma(1 - z);
  }
  let sum = coeffs[0];
  for (let k = 1; k < coeffs.length; k++) {
    sum += coeffs[k] / (z - 1 + k);
  }
  const base = z + g - 0.5;
  return 0.5 * Math.log(2 * Math.PI) + (z - 0.5) * Math.log(base) - base + Math.log(sum);
}

/** P(T <= t) for Student's t with df degrees of freedom. */
export function studentCdf(t: number, df: number): number {
  if (t === 0) return 0.5;
  const tail = 0.5 * incompleteBeta(df / (df + t * t), df / 2, 0.5);
  return t > 0 ? 1 - tail : tail;
}

/** Quantile by bisection; accurate to ~1e-12, plenty for CI reporting. */
export function studentQuantile(p: number, df: number): number {
  if (df < 1 || p <= 0 || p >= 1) {
    throw new Error(`studentQuantile: p in (0,1) and df >= 1 required, got p=${p} df=${df}`);
  }
  if (p === 0.5) return 0;
  if (p < 0.5) return -studentQuantile(1 - p, df);
  let lo = 0;
  let hi = 1;
  while (studentCdf(hi, df) < p) hi *= 2;
  for (let i = 0; i < 200; i++) {
    const mid = 0.5 * (lo + hi);
    if (studentCdf(mid, df) < p) lo = mid;
    else hi = mid;
    if (hi - lo < 1e-13 * Math.max(1, hi)) break;
  }
  return 0.5 * (lo + hi);
}

export function mean(values: readonly number[]): number {
  return values.reduce((acc, v) => acc + v, 0) / values.length;
}

export function sampleStd(values: readonly number[]): number {
  const m = mean(values);
  const ss = values.reduce((acc, v) => acc + (v - m) * (v - m), 0);
  return Math.sqrt(ss / (values.length - 1));
}

/** 95% confidence half-width: t_{0.975, n-1} * sd / sqrt(n); null below n = 2. */
export function ci95(values: readonly number[]): number | null {
  const n = values.length;
  if (n < 2) return null;
  return (studentQuantile(0.975, n - 1) * sampleStd(values)) / Math.sqrt(n);
}

function displayName(rating: Rating): string {
  if (rating.kind === "hidden_reference") return "reference";
  if (rating.kind === "anchor") return "anchor";
  return rating.system ?? "unknown";
}

/** Per-system mean +- CI95 over the given (already screened) ratings. */
export function aggregateScores(ratings: readonly Rating[]): SystemScore[] {
  const groups = new Map<string, number[]>();
  for (const rating of ratings) {
    const key = displayName(rating);
    const list = groups.get(key) ?? [];
    list.push(rating.score);
    groups.set(key, list);
  }
  return [...groups.entries()]
    .map(([system, scores]) => ({
      system,
      mean: mean(scores),
      ci95: ci95(scores),
      n: scores.length,
    }))
    .sort((a, b) => a.system.localeCompare(b.system));
}

export function formatScore(score: SystemScore): string {
  const ci = score.ci95 === null ? "n/a" : score.ci95.toFixed(2);
  return `${score.mean.toFixed(2)} ± ${ci}`;
}
