/** Landmark providers: every source of frames the studio can capture from or
 * replay during live testing. All providers emit server-valid records with
 * strictly increasing timestamps.
 */

import { renderPose, type PoseParams } from "./fk.js";
import type { FrameRecord, HandednessName } from "./types.js";

export interface LandmarkProvider {
  readonly kind: "SyntheticPoseEditor" | "RecordedFilePlayer" | "BrowserHandTracker";
  /** Produce the next frame; the caller paces the rate. */
  next(): FrameRecord;
  reset(): void;
}

/** Deterministic small PRNG (mulberry32) so captures replay identically. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface EditorState extends PoseParams {
  handedness: HandednessName;
  center: [number, number];
  scale: number;
}

export const NEUTRAL_POSE: EditorState = {
  jointAngles: new Array(15).fill(0.3),
  thumbAbduction: 0,
  thumbRotation: 0,
  globalRotation: [0, 0, 0],
  handedness: "right",
  center: [0.5, 0.5],
  scale: 0.35,
};

/** Slider-driven pose source with a small deterministic angle jitter, so a
 * capture of N frames carries natural variation. */
export class SyntheticPoseEditor implements LandmarkProvider {
  readonly kind = "SyntheticPoseEditor";
  state: EditorState;
  jitterSigma: number;
  private rand: () => number;
  private readonly seed: number;
  private tMs = 0;

  constructor(state?: Partial<EditorState>, jitterSigma = 0.02, seed = 1) {
    this.state = { ...NEUTRAL_POSE, ...state };
    this.jitterSigma = jitterSigma;
    this.seed = seed;
    this.rand = mulberry32(seed);
  }

  setPose(update: Partial<EditorState>): void {
    this.state = { ...this.state, ...update };
  }

  private gauss(): number {
    // Box-Muller from the deterministic uniform source
    const u = Math.max(this.rand(), 1e-12);
    const v = this.rand();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }

  next(): FrameRecord {
    this.tMs += 33;
    const sigma = this.jitterSigma;
    const jittered: PoseParams = {
      jointAngles: this.state.jointAngles.map((a) =>
        Math.min(1.9, Math.max(0, a + sigma * this.gauss()))),
      thumbAbduction: this.state.thumbAbduction + sigma * this.gauss(),
      thumbRotation: this.state.thumbRotation + sigma * this.gauss(),
      globalRotation: this.state.globalRotation.map((r) =>
        r + sigma * this.gauss()) as [number, number, number],
    };
    return renderPose(jittered, {
      handedness: this.state.handedness,
      center: this.state.center,
      scale: this.state.scale,
      timestampMs: this.tMs,
    });
  }

  reset(): void {
    this.tMs = 0;
    this.rand = mulberry32(this.seed);
  }
}

/** Replays frames parsed from a .lmk.jsonl file, looping and re-stamping
 * timestamps so they stay strictly increasing. */
export class RecordedFilePlayer implements LandmarkProvider {
  readonly kind = "RecordedFilePlayer";
  private frames: FrameRecord[];
  private index = 0;
  private tMs = 0;

  constructor(frames: FrameRecord[]) {
    if (frames.length === 0) throw new Error("RecordedFilePlayer needs at least one frame");
    this.frames = frames;
  }

  static fromJsonl(text: string): RecordedFilePlayer {
    const frames: FrameRecord[] = [];
    for (const line of text.split("\n")) {
      if (!line.trim()) continue;
      const record = JSON.parse(line) as { frames: FrameRecord[] };
      frames.push(...record.frames);
    }
    return new RecordedFilePlayer(frames);
  }

  next(): FrameRecord {
    const frame = this.frames[this.index];
    this.index = (this.index + 1) % this.frames.length;
    this.tMs += 33;
    return { ...frame, t_ms: this.tMs };
  }

  reset(): void {
    this.index = 0;
    this.tMs = 0;
  }
}

/** Adapter interface for any in-browser hand-tracking engine. The repo ships
 * only the interface plus a mock, keeping CI free of ML dependencies. */
export interface HandTrackerEngine {
  /** Latest detection, or null when no hand is visible. */
  currentFrame(): FrameRecord | null;
}

export class BrowserHandTracker implements LandmarkProvider {
  readonly kind = "BrowserHandTracker";
  private tMs = 0;

  constructor(private readonly engine: HandTrackerEngine,
              private readonly fallback: LandmarkProvider = new SyntheticPoseEditor()) {}

  next(): FrameRecord {
    const detected = this.engine.currentFrame();
    const frame = detected ?? this.fallback.next();
    this.tMs += 33;
    return { ...frame, t_ms: this.tMs };
  }

  reset(): void {
    this.tMs = 0;
    this.fallback.reset();
  }
}

/** Mock engine for tests and demos: emits a fixed editor pose. */
export class MockHandTrackerEngine implements HandTrackerEngine {
  private readonly editor: SyntheticPoseEditor;

  constructor(state?: Partial<EditorState>) {
    this.editor = new SyntheticPoseEditor(state, 0.0);
  }

  currentFrame(): FrameRecord {
    return this.editor.next();
  }
}
