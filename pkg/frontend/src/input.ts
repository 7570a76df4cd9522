/**
 * Pointer-to-workspace mapping.
 *
 * Canvas x/y steer the tool in the floor plane; the wheel (or drag)
 * accumulates depth along the approach axis. The affine map is
 * invertible inside the workspace and clamps at its bounds.
 */

import { PoseIn, Vec3 } from "./protocol.js";

export interface InputMapping {
  canvasWidth: number; // px
  canvasHeight: number; // px
  /** workspace x-range shown across the canvas, mm */
  workspaceMin: Vec3;
  workspaceMax: Vec3;
  /** depth change per wheel notch, mm */
  depthStep: number;
}

export const DEFAULT_MAPPING: InputMapping = {
  canvasWidth: 600,
  canvasHeight: 600,
  workspaceMin: [-20, -20, -35],
  workspaceMax: [20, 20, 15],
  depthStep: 0.5,
};

export const MAX_POSE_RATE_HZ = 120;

const clamp = (v: number, lo: number, hi: number) =>
  Math.min(Math.max(v, lo), hi);

export class DepthAccumulator {
  private depth: number;

  constructor(
    private readonly mapping: InputMapping,
    initialDepth = 0,
  ) {
    this.depth = initialDepth;
  }

  /** One wheel notch changes depth by exactly the configured step. */
  notch(direction: 1 | -1): number {
    const [, , zMin] = this.mapping.workspaceMin;
    const [, , zMax] = this.mapping.workspaceMax;
    this.depth = clamp(this.depth + direction * this.mapping.depthStep, zMin, zMax);
    return this.depth;
  }

  value(): number {
    return this.depth;
  }
}

/** Canvas px + accumulated depth -> workspace pose, clamped to bounds. */
export function mapPointer(
  canvasX: number,
  canvasY: number,
  depth: number,
  mapping: InputMapping,
  t: number,
): PoseIn {
  const [xMin, yMin, zMin] = mapping.workspaceMin;
  const [xMax, yMax, zMax] = mapping.workspaceMax;
  const x = xMin + (canvasX / mapping.canvasWidth) * (xMax - xMin);
  // canvas y grows downward; workspace y grows upward
  const y = yMax - (canvasY / mapping.canvasHeight) * (yMax - yMin);
  return {
    kind: "pose_in",
    t,
    position: [
      clamp(x, xMin, xMax),
      clamp(y, yMin, yMax),
      clamp(depth, zMin, zMax),
    ],
  };
}

/** Inverse of mapPointer inside the bounds (used by tests and the cursor echo). */
export function unmapPointer(
  position: Vec3,
  mapping: InputMapping,
): { canvasX: number; canvasY: number; depth: number } {
  const [xMin, yMin] = mapping.workspaceMin;
  const [xMax, yMax] = mapping.workspaceMax;
  return {
    canvasX: ((position[0] - xMin) / (xMax - xMin)) * mapping.canvasWidth,
    canvasY: ((yMax - position[1]) / (yMax - yMin)) * mapping.canvasHeight,
    depth: position[2],
  };
}

/** Drops pose sends that would exceed the rate budget (latest one wins later). */
export class RateLimiter {
  private lastSent = -Infinity;

  constructor(private readonly maxHz: number = MAX_POSE_RATE_HZ) {}

  allow(nowMs: number): boolean {
    if (nowMs - this.lastSent >= 1000 / this.maxHz) {
      this.lastSent = nowMs;
      return true;
    }
    return false;
  }
}
