export type HandednessName = "left" | "right";

/** Wire format of one hand frame, as the server expects it. */
export interface FrameRecord {
  t_ms: number;
  handedness: HandednessName;
  loc: [number, number, number];
  pts: number[][]; // 21 x [x, y, z]
}

export interface ProjectInfo {
  id: string;
  name: string;
  classes: string[];
  sample_counts: Record<string, number>;
  created_ms: number;
  updated_ms: number;
}

export interface UploadResult {
  added: number;
  deduplicated: boolean;
  sample_counts: Record<string, number>;
}

export type RegimeName = "finetune" | "frozen" | "random";

export interface TrainRequest {
  regime: RegimeName;
  k: number;
  seed: number;
  epochs?: number;
  lr_head?: number;
  lr_embedder?: number;
  batch_size?: number;
}

export type JobStateName = "queued" | "running" | "succeeded" | "failed";

export interface JobInfo {
  id: string;
  project_id: string;
  state: JobStateName;
  progress_epoch: number;
  total_epochs: number;
  result_model_id: string | null;
  error: string | null;
  eval_summary: Record<string, number> | null;
}

export interface ModelInfo {
  id: string;
  project_id: string | null;
  labels: string[];
  metadata: Record<string, unknown>;
  file_bytes: number;
  digest: string;
}

export interface StreamReply {
  t_ms?: number;
  top?: { label: string; p: number }[];
  error?: { code: string; message: string };
}

export interface ApiErrorDetail {
  code: string;
  message: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: ApiErrorDetail,
  ) {
    super(`${detail.code}: ${detail.message}`);
  }
}
