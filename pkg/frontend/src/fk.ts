/** Client-side forward kinematics of the 21-point hand skeleton.
 *
 * Mirrors the server's generator (same canonical bones, splay, thumb rest
 * elevation) and is validated against vectors exported from it
 * (tests/fixtures/fk_vectors.json). Used only to preview and emit synthetic
 * frames; classification always happens on the server.
 */

import type { FrameRecord, HandednessName } from "./types.js";

export const CANONICAL_BONES = [
  0.25, 0.2, 0.16, 0.13, // thumb
  0.43, 0.22, 0.15, 0.12, // index
  0.45, 0.25, 0.17, 0.13, // middle
  0.42, 0.22, 0.15, 0.12, // ring
  0.38, 0.16, 0.11, 0.1, // pinky
];

export const SPLAY = [0.95, 0.26, 0.0, -0.21, -0.44];
export const THUMB_REST_ELEVATION = -0.45;

/** Bone pairs (parent, child) for drawing the skeleton preview. */
export const BONE_EDGES: [number, number][] = [
  [0, 1], [1, 2], [2, 3], [3, 4],
  [0, 5], [5, 6], [6, 7], [7, 8],
  [0, 9], [9, 10], [10, 11], [11, 12],
  [0, 13], [13, 14], [14, 15], [15, 16],
  [0, 17], [17, 18], [18, 19], [19, 20],
];

export interface PoseParams {
  /** 15 flexion angles in [0, 1.9] rad, 3 per finger, thumb first. */
  jointAngles: number[];
  thumbAbduction: number;
  thumbRotation: number;
  /** XYZ Euler angles applied about the wrist. */
  globalRotation: [number, number, number];
}

type Vec3 = [number, number, number];
type Mat3 = number[]; // row-major 3x3

function rotationMatrix(axis: Vec3, angle: number): Mat3 {
  const [x, y, z] = axis;
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  const cc = 1 - c;
  return [
    c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s,
    y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s,
    z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc,
  ];
}

function matMul(a: Mat3, b: Mat3): Mat3 {
  const out = new Array<number>(9).fill(0);
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      let acc = 0;
      for (let k = 0; k < 3; k++) acc += a[i * 3 + k] * b[k * 3 + j];
      out[i * 3 + j] = acc;
    }
  }
  return out;
}

function apply(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
    m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
    m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
  ];
}

function eulerXyz(rx: number, ry: number, rz: number): Mat3 {
  return matMul(
    rotationMatrix([0, 0, 1], rz),
    matMul(rotationMatrix([0, 1, 0], ry), rotationMatrix([1, 0, 0], rx)),
  );
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function normalize(v: Vec3): Vec3 {
  const n = Math.hypot(v[0], v[1], v[2]);
  return [v[0] / n, v[1] / n, v[2] / n];
}

const Z_AXIS: Vec3 = [0, 0, 1];

/** 21 points in the hand-local frame (right hand, wrist at origin). */
export function localSkeleton(pose: PoseParams): Vec3[] {
  const pts: Vec3[] = Array.from({ length: 21 }, () => [0, 0, 0] as Vec3);
  for (let finger = 0; finger < 5; finger++) {
    let baseDir: Vec3 = [Math.sin(SPLAY[finger]), Math.cos(SPLAY[finger]), 0];
    if (finger === 0) {
      baseDir = apply(rotationMatrix(Z_AXIS, pose.thumbAbduction), baseDir);
      const elevAxis = normalize(cross(Z_AXIS, baseDir));
      baseDir = apply(
        rotationMatrix(elevAxis, THUMB_REST_ELEVATION + pose.thumbRotation),
        baseDir,
      );
    }
    const flexAxis = normalize(cross(Z_AXIS, baseDir));
    let pos: Vec3 = [
      CANONICAL_BONES[finger * 4] * baseDir[0],
      CANONICAL_BONES[finger * 4] * baseDir[1],
      CANONICAL_BONES[finger * 4] * baseDir[2],
    ];
    pts[1 + finger * 4] = pos;
    let direction = baseDir;
    for (let joint = 0; joint < 3; joint++) {
      const angle = pose.jointAngles[finger * 3 + joint];
      direction = apply(rotationMatrix(flexAxis, angle), direction);
      const len = CANONICAL_BONES[finger * 4 + 1 + joint];
      pos = [
        pos[0] + len * direction[0],
        pos[1] + len * direction[1],
        pos[2] + len * direction[2],
      ];
      pts[2 + finger * 4 + joint] = pos;
    }
  }
  return pts;
}

export interface RenderOptions {
  handedness: HandednessName;
  center: [number, number];
  scale: number;
  timestampMs: number;
}

/** Image-space frame record; left hands are the x-mirror about the wrist. */
export function renderPose(pose: PoseParams, opts: RenderOptions): FrameRecord {
  const rot = eulerXyz(...pose.globalRotation);
  const mirror = opts.handedness === "left" ? -1 : 1;
  const pts = localSkeleton(pose).map((p) => {
    const r = apply(rot, p);
    return [
      opts.center[0] + opts.scale * mirror * r[0],
      opts.center[1] + opts.scale * r[1],
      opts.scale * r[2],
    ];
  });
  return {
    t_ms: opts.timestampMs,
    handedness: opts.handedness,
    loc: [opts.center[0], opts.center[1], opts.scale],
    pts,
  };
}
