/** RFC-4180 CSV export of ratings plus an aggregate summary block. */

import { writeFileSync } from "node:fs";

import type { Rating, SystemScore } from "./types.js";

const RATING_HEADER = ["rater_id", "item_id", "label", "kind", "system", "score", "timestamp"] as const;

export function csvField(value: string): string {
  if (/[",\r\n]/.test(value)) {
    return '"' + value.replace(/"/g, '""') + '"';
  }
  return value;
}

export function ratingsToCsv(ratings: readonly Rating[], scores: readonly SystemScore[]): string {
  const lines: string[] = [RATING_HEADER.join(",")];
  for (const r of ratings) {
    lines.push(
      [r.raterId, r.itemId, r.label, r.kind, r.system ?? "", String(r.score), r.timestamp]
        .map(csvField)
        .join(","),
    );
  }
  lines.push("");
  lines.push("system,mean,ci95,n");
  for (const s of scores) {
    lines.push(
      [s.system, s.mean.toFixed(6), s.ci95 === null ? "" : s.ci95.toFixed(6), String(s.n)]
        .map(csvField)
        .join(","),
    );
  }
  return lines.join("\r\n") + "\r\n";
}

export function exportCsv(
  ratings: readonly Rating[],
  scores: readonly SystemScore[],
  path: string,
): void {
  writeFileSync(path, ratingsToCsv(ratings, scores), "utf-8");
}

/** Parse the ratings block back; the summary block is ignored. */
export function parseRatingsCsv(text: string): Rating[] {
  const rows = parseCsv(text);
  const out: Rating[] = [];
  for (const row of rows.slice(1)) {
    if (row.length === 1 && row[0] === "") break; // summary separator
    if (row[0] === "system") break;
    out.push({
      raterId: row[0],
      itemId: row[1],
      label: row[2],
      kind: row[3] as Rating["kind"],
      system: row[4] === "" ? null : row[4],
      score: Number(row[5]),
      timestamp: row[6],
    });
  }
  return out;
}

export function parseCsv(text: string): string[][] {
  const rows: string[][] = [];
  let field = "";
  let row: string[] = [];
  let inQuotes = false;
  for (let i = 0; i < text.length; i++) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          inQuotes = false;
        }
      } else {
        field += ch;
      }
    } else if (ch === '"') {
      inQuotes = true;
    } else if (ch === ",") {
      row.push(field);
      field = "";
    } else if (ch === "\r") {
      // handled with the following \n
    } else if (ch === "\n") {
      row.push(field);
      rows.push(row);
      field = "";
      row = [];
    } else {
      field += ch;
    }
  }
  if (field.length > 0 || row.length > 0) {
    row.push(field);
    rows.push(row);
  }
  return rows;
}
