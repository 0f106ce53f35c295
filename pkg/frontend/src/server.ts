/** Thin static-file + JSON-endpoint service around the session machinery. */

import { readFileSync } from "node:fs";
import path from "node:path";

import express from "express";

import { buildSession, type BuiltSession } from "./session.js";
import { screenRaters, applyScreening } from "./screening.js";
import { aggregateScores } from "./stats.js";
import { RatingStore, checkSubmission, type TrialSubmission } from "./store.js";
import type { SessionManifest, StimulusSecret } from "./types.js";

export interface HarnessOptions {
  manifestPath: string;
  ratingsPath: string;
  seed: number;
  publicDir?: string;
}

export function createHarness(options: HarnessOptions) {
  const rootDir = path.dirname(path.resolve(options.manifestPath));
  const manifest = JSON.parse(readFileSync(options.manifestPath, "utf-8")) as SessionManifest;
  const store = new RatingStore(options.ratingsPath);
  const sessions = new Map<string, BuiltSession>(); // per-rater isolation
  const tokens = new Map<string, StimulusSecret>();

  function sessionFor(raterId: string): BuiltSession {
    let built = sessions.get(raterId);
    if (!built) {
      built = buildSession(manifest, rootDir, raterId, options.seed);
      sessions.set(raterId, built);
      for (const [token, secret] of built.secrets) tokens.set(token, secret);
    }
    return built;
  }

  const app = express();
  app.use(express.json());
  if (options.publicDir) {
    app.use(express.static(options.publicDir));
  }

  app.get("/session", (req, res) => {
    const raterId = String(req.query.rater ?? "");
    if (!raterId) {
      res.status(400).json({ error: "missing ?rater=<id>" });
      return;
    }
    try {
      res.json(sessionFor(raterId).session);
    } catch (err) {
      res.status(500).json({ error: String(err) });
    }
  });

  app.get("/audio/:token", (req, res) => {
    const secret = tokens.get(req.params.token);
    if (!secret) {
      res.status(404).json({ error: "unknown stimulus token" });
      return;
    }
    res.sendFile(path.resolve(rootDir, secret.path));
  });

  app.post("/ratings", (req, res) => {
    const body = req.body as { raterId?: string } & TrialSubmission;
    const raterId = body.raterId ?? "";
    const built = sessions.get(raterId);
    if (!built) {
      res.status(400).json({ accepted: false, reason: `no session for rater ${raterId}` });
      return;
    }
    const result = checkSubmission(built, { itemId: body.itemId, ratings: body.ratings ?? [] });
    if (!result.accepted) {
      res.status(400).json(result);
      return;
    }
    store.append(result.ratings);
    res.json({ accepted: true, count: result.ratings.length });
  });

  app.get("/results", (_req, res) => {
    const all = store.readAll();
    const screening = screenRaters(all);
    const scores = aggregateScores(applyScreening(all, screening));
    res.json({ screening, scores, totalRatings: all.length });
  });

  return { app, store, sessionFor };
}
