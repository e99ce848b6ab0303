/** Browser entry point: wires the session to a plain-DOM interface with a
 * skeleton-preview canvas, capture controls, training form and live test view.
 */

import { ApiClient, type StudioConfig } from "./api.js";
import { BONE_EDGES } from "./fk.js";
import {
  RecordedFilePlayer,
  SyntheticPoseEditor,
  type LandmarkProvider,
} from "./providers.js";
import { StudioSession } from "./session.js";
import type { FrameRecord, JobInfo, RegimeName } from "./types.js";

const FINGERS = ["thumb", "index", "middle", "ring", "pinky"];
const JOINTS = ["mcp", "pip", "dip"];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function show(message: string, isError = false): void {
  const log = el<HTMLElement>("log");
  const line = document.createElement("div");
  line.textContent = message;
  line.className = isError ? "log-error" : "log-info";
  log.prepend(line);
}

async function loadConfig(): Promise<StudioConfig> {
  try {
    const response = await fetch("./studio.config.json");
    if (response.status === 200) return (await response.json()) as StudioConfig;
  } catch {
    // fall through to same-origin default
  }
  return { serverUrl: window.location.origin };
}

function drawSkeleton(canvas: HTMLCanvasElement, frame: FrameRecord): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const px = (p: number[]) => [p[0] * canvas.width, p[1] * canvas.height] as const;
  ctx.strokeStyle = "#2a6fdb";
  ctx.lineWidth = 2;
  for (const [a, b] of BONE_EDGES) {
    const [ax, ay] = px(frame.pts[a]);
    const [bx, by] = px(frame.pts[b]);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
  }
  ctx.fillStyle = "#d64045";
  for (const p of frame.pts) {
    const [x, y] = px(p);
    ctx.beginPath();
    ctx.arc(x, y, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

async function boot(): Promise<void> {
  const config = await loadConfig();
  const api = new ApiClient(config);
  const session = new StudioSession(api);
  const editor = new SyntheticPoseEditor();
  let liveProvider: LandmarkProvider = editor;

  // --- pose editor sliders -------------------------------------------------
  const sliderPanel = el<HTMLElement>("sliders");
  const addSlider = (label: string, min: number, max: number, value: number,
                     onInput: (v: number) => void) => {
    const row = document.createElement("label");
    row.className = "slider-row";
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(min);
    input.max = String(max);
    input.step = "0.01";
    input.value = String(value);
    input.addEventListener("input", () => {
      onInput(Number(input.value));
      preview();
    });
    row.append(`${label} `, input);
    sliderPanel.append(row);
  };
  FINGERS.forEach((finger, f) => {
    JOINTS.forEach((joint, j) => {
      addSlider(`${finger} ${joint}`, 0, 1.9, editor.state.jointAngles[f * 3 + j], (v) => {
        const angles = [...editor.state.jointAngles];
        angles[f * 3 + j] = v;
        editor.setPose({ jointAngles: angles });
      });
    });
  });
  addSlider("thumb abduction", -1.2, 1.2, 0, (v) => editor.setPose({ thumbAbduction: v }));
  addSlider("thumb rotation", -1.2, 1.2, 0, (v) => editor.setPose({ thumbRotation: v }));
  ["x", "y", "z"].forEach((axis, i) => {
    addSlider(`rotate ${axis}`, -1.5, 1.5, 0, (v) => {
      const rot = [...editor.state.globalRotation] as [number, number, number];
      rot[i] = v;
      editor.setPose({ globalRotation: rot });
    });
  });
  el<HTMLSelectElement>("handedness").addEventListener("change", (event) => {
    editor.setPose({ handedness: (event.target as HTMLSelectElement).value as "left" | "right" });
    preview();
  });

  const canvas = el<HTMLCanvasElement>("preview");
  const preview = () => {
    const jitter = editor.jitterSigma;
    editor.jitterSigma = 0;
    drawSkeleton(canvas, editor.next());
    editor.jitterSigma = jitter;
  };
  preview();

  // --- project + capture ----------------------------------------------------
  const refreshProject = () => {
    const info = session.project;
    el<HTMLElement>("project-info").textContent = info
      ? `${info.name} (${info.id}) — ` + info.classes
          .map((c) => `${c}: ${info.sample_counts[c] ?? 0}`).join(", ")
      : "no project";
    const select = el<HTMLSelectElement>("capture-class");
    select.innerHTML = "";
    for (const name of info?.classes ?? []) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      select.append(option);
    }
  };

  el<HTMLButtonElement>("create-project").addEventListener("click", async () => {
    try {
      const name = el<HTMLInputElement>("project-name").value || "studio project";
      const classes = el<HTMLInputElement>("project-classes").value
        .split(",").map((s) => s.trim()).filter(Boolean);
      await session.createProject(name, classes);
      refreshProject();
      show(`created project ${session.project!.id}`);
    } catch (err) {
      show(String(err), true);
    }
  });

  el<HTMLButtonElement>("add-class").addEventListener("click", async () => {
    try {
      await session.addClass(el<HTMLInputElement>("new-class").value.trim());
      refreshProject();
    } catch (err) {
      show(String(err), true);
    }
  });

  el<HTMLButtonElement>("capture").addEventListener("click", async () => {
    try {
      const className = el<HTMLSelectElement>("capture-class").value;
      const count = Number(el<HTMLInputElement>("capture-count").value) || 10;
      const result = await session.captureSamples(className, count, editor);
      refreshProject();
      show(`captured ${result.added} frames into ${className}`);
    } catch (err) {
      show(String(err), true);
    }
  });

  // --- training ---------------------------------------------------------------
  el<HTMLButtonElement>("train").addEventListener("click", async () => {
    try {
      const spec = {
        regime: el<HTMLSelectElement>("regime").value as RegimeName,
        k: Number(el<HTMLInputElement>("k").value) || 10,
        seed: Number(el<HTMLInputElement>("seed").value) || 0,
        epochs: Number(el<HTMLInputElement>("epochs").value) || 50,
      };
      const onProgress = (job: JobInfo) => {
        el<HTMLElement>("job-status").textContent =
          `job ${job.id}: ${job.state} (epoch ${job.progress_epoch}/${job.total_epochs})`;
      };
      const job = await session.runTraining(spec, onProgress);
      if (job.state === "succeeded") {
        show(`trained model ${job.result_model_id}`);
        await refreshModels();
      } else {
        show(`training failed: ${job.error}`, true);
      }
    } catch (err) {
      show(String(err), true);
    }
  });

  const refreshModels = async () => {
    const models = await api.listModels();
    const select = el<HTMLSelectElement>("model-select");
    select.innerHTML = "";
    for (const model of models) {
      const option = document.createElement("option");
      option.value = model.id;
      option.textContent = `${model.id} [${model.labels.join(",")}] ${model.digest.slice(0, 8)}`;
      select.append(option);
    }
    if (session.selectedModelId) select.value = session.selectedModelId;
  };
  el<HTMLButtonElement>("refresh-models").addEventListener("click", () => {
    refreshModels().catch((err) => show(String(err), true));
  });

  // --- live test -----------------------------------------------------------------
  el<HTMLInputElement>("replay-file").addEventListener("change", async (event) => {
    const file = (event.target as HTMLInputElement).files?.[0];
    if (!file) return;
    liveProvider = RecordedFilePlayer.fromJsonl(await file.text());
    show(`loaded replay file ${file.name}`);
  });
  el<HTMLSelectElement>("live-provider").addEventListener("change", (event) => {
    const kind = (event.target as HTMLSelectElement).value;
    if (kind === "editor") liveProvider = editor;
    show(`live provider: ${kind}`);
  });

  el<HTMLButtonElement>("live-test").addEventListener("click", async () => {
    const modelId = el<HTMLSelectElement>("model-select").value;
    if (!modelId) {
      show("no model selected", true);
      return;
    }
    const frames = Number(el<HTMLInputElement>("live-frames").value) || 90;
    const topView = el<HTMLElement>("top-labels");
    try {
      const stats = await session.liveTest(modelId, liveProvider, frames, (update) => {
        const top3 = (update.reply.top ?? []).slice(0, 3);
        topView.innerHTML = top3
          .map((t) => `<div>${t.label}: ${(t.p * 100).toFixed(1)}%</div>`).join("");
        el<HTMLElement>("fps").textContent = `${update.fps.toFixed(1)} fps`;
      });
      show(`live test done: ${stats.repliesReceived} replies, ${stats.meanFps.toFixed(1)} fps`);
    } catch (err) {
      show(String(err), true);
    }
  });

  try {
    const status = await api.status();
    show(`connected to ${config.serverUrl} (server v${status.version})`);
  } catch (err) {
    show(`cannot reach server at ${config.serverUrl}: ${err}`, true);
  }
}

boot().catch((err) => {
  document.body.textContent = `studio failed to start: ${err}`;
});
