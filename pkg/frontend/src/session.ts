/** Studio session: the state machine behind the UI. Holds the active project,
 * provider and model selection; capture and live-test are mutually exclusive.
 * Every number it reports originates from a server response.
 */

import type { ApiClient, StreamHandle } from "./api.js";
import type { LandmarkProvider } from "./providers.js";
import type {
  JobInfo,
  ProjectInfo,
  StreamReply,
  TrainRequest,
  UploadResult,
} from "./types.js";

export type SessionMode = "idle" | "capturing" | "testing";

export interface LiveTestUpdate {
  reply: StreamReply;
  framesSent: number;
  fps: number;
}

export interface LiveTestStats {
  framesSent: number;
  repliesReceived: number;
  topLabelCounts: Record<string, number>;
  meanFps: number;
}

export class StudioSession {
  mode: SessionMode = "idle";
  project: ProjectInfo | null = null;
  selectedModelId: string | null = null;

  constructor(private readonly api: ApiClient) {}

  async createProject(name: string, classes: string[]): Promise<ProjectInfo> {
    this.project = await this.api.createProject(name, classes);
    return this.project;
  }

  async openProject(projectId: string): Promise<ProjectInfo> {
    this.project = await this.api.getProject(projectId);
    return this.project;
  }

  async addClass(name: string): Promise<ProjectInfo> {
    this.requireProject();
    this.project = await this.api.addClass(this.project!.id, name);
    return this.project;
  }

  private requireProject(): void {
    if (!this.project) throw new Error("no active project");
  }

  private enter(mode: Exclude<SessionMode, "idle">): void {
    if (this.mode !== "idle") throw new Error(`busy: session is ${this.mode}`);
    this.mode = mode;
  }

  /** Capture exactly `count` frames from the provider into one class.
   * Counters come back from the server's upload response. */
  async captureSamples(className: string, count: number,
                       provider: LandmarkProvider): Promise<UploadResult> {
    this.requireProject();
    if (count === 0) {
      return { added: 0, deduplicated: false,
               sample_counts: this.project!.sample_counts };
    }
    this.enter("capturing");
    try {
      const frames = Array.from({ length: count }, () => provider.next());
      const result = await this.api.uploadSamples(this.project!.id, className, frames);
      this.project = await this.api.getProject(this.project!.id);
      return result;
    } finally {
      this.mode = "idle";
    }
  }

  /** Start a training job and poll it to a terminal state. */
  async runTraining(spec: TrainRequest, onProgress?: (job: JobInfo) => void,
                    pollMs = 250): Promise<JobInfo> {
    this.requireProject();
    let job = await this.api.startJob(this.project!.id, spec);
    onProgress?.(job);
    while (job.state === "queued" || job.state === "running") {
      await new Promise((resolve) => setTimeout(resolve, pollMs));
      job = await this.api.getJob(job.id);
      onProgress?.(job);
    }
    if (job.state === "succeeded" && job.result_model_id) {
      this.selectedModelId = job.result_model_id;
    }
    return job;
  }

  /** Stream `frameCount` provider frames through the model and collect the
   * server's rankings; reports rolling frames-per-second. */
  async liveTest(modelId: string, provider: LandmarkProvider, frameCount: number,
                 onUpdate?: (update: LiveTestUpdate) => void): Promise<LiveTestStats> {
    this.enter("testing");
    const stream: StreamHandle = this.api.openStream(modelId);
    try {
      await stream.opened;
      const stats: LiveTestStats = {
        framesSent: 0,
        repliesReceived: 0,
        topLabelCounts: {},
        meanFps: 0,
      };
      const started = Date.now();
      let resolveDone: () => void;
      const done = new Promise<void>((resolve) => { resolveDone = resolve; });
      stream.onReply((reply) => {
        stats.repliesReceived += 1;
        const top = reply.top?.[0];
        if (top) {
          stats.topLabelCounts[top.label] = (stats.topLabelCounts[top.label] ?? 0) + 1;
        }
        const elapsed = (Date.now() - started) / 1000;
        const fps = elapsed > 0 ? stats.repliesReceived / elapsed : 0;
        onUpdate?.({ reply, framesSent: stats.framesSent, fps });
        if (stats.repliesReceived >= frameCount) resolveDone();
      });
      for (let i = 0; i < frameCount; i++) {
        stream.send(provider.next());
        stats.framesSent += 1;
      }
      await done;
      stats.meanFps = stats.repliesReceived / Math.max((Date.now() - started) / 1000, 1e-9);
      return stats;
    } finally {
      stream.close();
      this.mode = "idle";
    }
  }
}
