/** End-to-end acceptance: drive a real gestureforge server through the studio
 * session using only the SyntheticPoseEditor, then prove the thin-client
 * property by intercepting all traffic — every number the studio shows must
 * originate from a recorded server response.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, type FetchLike, type SocketFactory } from "../src/api.js";
import { SyntheticPoseEditor, type EditorState } from "../src/providers.js";
import { StudioSession } from "../src/session.js";
import type { StreamReply } from "../src/types.js";

const PORT = 8391;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let dataDir: string;

// --- traffic interception ----------------------------------------------------

const httpResponses: string[] = [];
const wsMessages: string[] = [];

const recordingFetch: FetchLike = async (url, init) => {
  const response = await fetch(url, init);
  const text = await response.text();
  httpResponses.push(text);
  return { status: response.status, json: async () => JSON.parse(text) };
};

const recordingSocketFactory: SocketFactory = (url, headers) => {
  const socket = new WebSocket(url, { headers });
  const listeners: Record<string, ((event: any) => void)[]> = {};
  socket.on("open", () => (listeners.open ?? []).forEach((l) => l({})));
  socket.on("message", (data) => {
    const text = data.toString();
    wsMessages.push(text);
    (listeners.message ?? []).forEach((l) => l({ data: text }));
  });
  socket.on("close", (code) => (listeners.close ?? []).forEach((l) => l({ code })));
  socket.on("error", (err) => (listeners.error ?? []).forEach((l) => l(err)));
  return {
    send: (data: string) => socket.send(data),
    close: () => socket.close(),
    addEventListener: (type, listener) => (listeners[type] ??= []).push(listener),
  };
};

// --- editor poses for the two custom gestures --------------------------------

const TIGHT_FIST: Partial<EditorState> = {
  jointAngles: [1.0, 0.9, 0.7, 1.5, 1.35, 1.05, 1.5, 1.35, 1.05, 1.5, 1.35, 1.05, 1.5, 1.35, 1.05],
  thumbRotation: -0.6,
};

const WIDE_OPEN: Partial<EditorState> = {
  jointAngles: new Array(15).fill(0.0),
  thumbAbduction: 0.3,
};

const RELAXED_BG: Partial<EditorState> = {
  jointAngles: new Array(15).fill(0.45),
};

async function waitForServer(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/api/v1/status`);
      if (response.status === 200) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
  throw new Error("server did not come up");
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "gestureforge-e2e-"));
  server = spawn("python3", ["-m", "gestureforge.cli", "serve",
                             "--port", String(PORT), "--data-dir", dataDir],
                 { stdio: ["ignore", "pipe", "pipe"] });
  server.stderr?.on("data", () => { /* uvicorn logs */ });
  await waitForServer();
}, 60_000);

afterAll(() => {
  server?.kill();
  if (dataDir) rmSync(dataDir, { recursive: true, force: true });
});

describe("studio end-to-end against a live server", () => {
  it("collect -> train (frozen) -> live test reaches 95% top-1, thin-client verified",
     async () => {
    const api = new ApiClient({ serverUrl: BASE }, recordingFetch, recordingSocketFactory);
    const session = new StudioSession(api);

    // 2-class project; capture 10 samples per class (background included)
    await session.createProject("e2e", ["tight_fist", "wide_open"]);
    const fistEditor = new SyntheticPoseEditor(TIGHT_FIST, 0.02, 101);
    const openEditor = new SyntheticPoseEditor(WIDE_OPEN, 0.02, 102);
    const bgEditor = new SyntheticPoseEditor(RELAXED_BG, 0.02, 103);
    await session.captureSamples("tight_fist", 10, fistEditor);
    await session.captureSamples("wide_open", 10, openEditor);
    const upload = await session.captureSamples("background", 10, bgEditor);
    expect(upload.sample_counts).toEqual(
      { background: 10, tight_fist: 10, wide_open: 10 });

    // frozen training with a fixed seed, polled to completion
    const states: string[] = [];
    const job = await session.runTraining(
      { regime: "frozen", k: 10, seed: 42, epochs: 50 },
      (j) => states.push(j.state));
    expect(job.state).toBe("succeeded");
    expect(job.result_model_id).toBeTruthy();
    expect(states).toContain("succeeded");

    // identical rerun: byte-identical model per the server's content digest
    const again = await session.runTraining(
      { regime: "frozen", k: 10, seed: 42, epochs: 50 });
    expect(again.result_model_id).toBe(job.result_model_id);
    const models = await api.listModels();
    const digests = models.filter((m) => m.id === job.result_model_id)
                          .map((m) => m.digest);
    expect(digests).toHaveLength(1); // content-addressed: one file for both runs

    // live test: replay the fist pose; expect >= 95% top-1
    const replayed = new SyntheticPoseEditor(TIGHT_FIST, 0.02, 777);
    const displayedProbs: number[] = [];
    const replies: StreamReply[] = [];
    const stats = await session.liveTest(
      job.result_model_id!, replayed, 60, (update) => {
        replies.push(update.reply);
        for (const entry of update.reply.top ?? []) displayedProbs.push(entry.p);
      });
    expect(stats.framesSent).toBe(60);
    expect(stats.repliesReceived).toBe(60);
    const top1 = (stats.topLabelCounts.tight_fist ?? 0) / 60;
    expect(top1).toBeGreaterThanOrEqual(0.95);
    expect(stats.meanFps).toBeGreaterThan(0);

    // --- thin-client check: every displayed value came over the wire ---------
    // every probability shown in the live view is verbatim in a ws message
    const wsPayloads = wsMessages.map((m) => JSON.parse(m) as StreamReply);
    const wireProbs = new Set<number>(
      wsPayloads.flatMap((m) => (m.top ?? []).map((t) => t.p)));
    expect(displayedProbs.length).toBeGreaterThan(0);
    for (const p of displayedProbs) expect(wireProbs.has(p)).toBe(true);
    // every reply the session processed is one the wire actually carried
    expect(stats.repliesReceived).toBeLessThanOrEqual(wsPayloads.length);
    // the sample counters shown came from a recorded http body
    const countersSeen = httpResponses.some((body) => {
      try {
        const parsed = JSON.parse(body);
        const counts = parsed.sample_counts;
        return counts && counts.tight_fist === 10 && counts.wide_open === 10 &&
               counts.background === 10;
      } catch {
        return false;
      }
    });
    expect(countersSeen).toBe(true);
    // the job states rendered during training all arrived over http
    for (const state of states) {
      expect(httpResponses.some((body) => body.includes(`"${state}"`))).toBe(true);
    }
  }, 150_000);
});
