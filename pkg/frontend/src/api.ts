/** Thin typed client for the recognizer service. All computation happens
 * server-side; this module only moves JSON. Transports are injectable so
 * tests can intercept every byte that crosses the wire.
 */

import {
  ApiError,
  type FrameRecord,
  type JobInfo,
  type ModelInfo,
  type ProjectInfo,
  type StreamReply,
  type TrainRequest,
  type UploadResult,
} from "./types.js";

export interface StudioConfig {
  serverUrl: string;
  token?: string;
}

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<{ status: number; json(): Promise<unknown> }>;

/** Minimal WebSocket surface shared by browsers and the `ws` package. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "open" | "message" | "close" | "error",
                   listener: (event: any) => void): void;
}

export type SocketFactory = (url: string, headers?: Record<string, string>) => SocketLike;

export interface StreamHandle {
  send(frame: FrameRecord): void;
  close(): void;
  onReply(listener: (reply: StreamReply) => void): void;
  onClose(listener: (code: number) => void): void;
  opened: Promise<void>;
}

export class ApiClient {
  private readonly base: string;
  private readonly token?: string;
  private readonly fetchImpl: FetchLike;
  private readonly socketFactory: SocketFactory;

  constructor(config: StudioConfig, fetchImpl?: FetchLike, socketFactory?: SocketFactory) {
    this.base = config.serverUrl.replace(/\/+$/, "");
    this.token = config.token;
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
    this.socketFactory = socketFactory ?? ((url) => new WebSocket(url) as unknown as SocketLike);
  }

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.token) headers.authorization = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.base}/api/v1${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await response.json()) as any;
    if (response.status >= 400) {
      const detail = payload?.detail;
      throw new ApiError(response.status,
        typeof detail === "object" && detail !== null && "code" in detail
          ? detail
          : { code: "http_error", message: JSON.stringify(payload) });
    }
    return payload as T;
  }

  status(): Promise<Record<string, unknown>> {
    return this.request("GET", "/status");
  }

  createProject(name: string, classes: string[]): Promise<ProjectInfo> {
    return this.request("POST", "/projects", { name, classes });
  }

  listProjects(): Promise<ProjectInfo[]> {
    return this.request("GET", "/projects");
  }

  getProject(projectId: string): Promise<ProjectInfo> {
    return this.request("GET", `/projects/${projectId}`);
  }

  addClass(projectId: string, name: string): Promise<ProjectInfo> {
    return this.request("POST", `/projects/${projectId}/classes`, { name });
  }

  uploadSamples(projectId: string, className: string, samples: FrameRecord[],
                key?: string): Promise<UploadResult> {
    return this.request("POST", `/projects/${projectId}/samples`,
      { class_name: className, samples, key });
  }

  startJob(projectId: string, spec: TrainRequest): Promise<JobInfo> {
    return this.request("POST", `/projects/${projectId}/jobs`, spec);
  }

  getJob(jobId: string): Promise<JobInfo> {
    return this.request("GET", `/jobs/${jobId}`);
  }

  listModels(): Promise<ModelInfo[]> {
    return this.request("GET", "/models");
  }

  modelInfo(modelId: string): Promise<ModelInfo> {
    return this.request("GET", `/models/${modelId}`);
  }

  openStream(modelId: string): StreamHandle {
    const wsBase = this.base.replace(/^http/, "ws");
    const headers = this.token ? { authorization: `Bearer ${this.token}` } : undefined;
    const socket = this.socketFactory(`${wsBase}/api/v1/stream/${modelId}`, headers);
    const replyListeners: ((reply: StreamReply) => void)[] = [];
    const closeListeners: ((code: number) => void)[] = [];
    const opened = new Promise<void>((resolve, reject) => {
      socket.addEventListener("open", () => resolve());
      socket.addEventListener("error", (event) => reject(event));
    });
    socket.addEventListener("message", (event: { data: unknown }) => {
      const text = typeof event.data === "string" ? event.data : String(event.data);
      const reply = JSON.parse(text) as StreamReply;
      for (const listener of replyListeners) listener(reply);
    });
    socket.addEventListener("close", (event: { code?: number }) => {
      for (const listener of closeListeners) listener(event.code ?? 1000);
    });
    return {
      send: (frame) => socket.send(JSON.stringify(frame)),
      close: () => socket.close(),
      onReply: (listener) => replyListeners.push(listener),
      onClose: (listener) => closeListeners.push(listener),
      opened,
    };
  }
}
