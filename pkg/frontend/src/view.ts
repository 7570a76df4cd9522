/**
 * View-state store and scene rendering.
 *
 * The scene is drawn as a 2D projection (top-down x/y plus a depth
 * read-out) with a force gauge against the 3.3 N device limit, a
 * latched fracture indicator and an outcome banner on termination.
 */

import { StateFrame } from "./protocol.js";
import { InputMapping, unmapPointer } from "./input.js";

export const FORCE_LIMIT_N = 3.3;
export const STALE_FRAME_MS = 500;

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface ViewState {
  connection: ConnectionStatus;
  frame: StateFrame | null;
  frameReceivedAt: number; // ms timestamp of the latest frame
  fractureLatched: boolean;
  outcome: string | null;
  taskRunning: boolean;
}

export function initialViewState(): ViewState {
  return {
    connection: "disconnected",
    frame: null,
    frameReceivedAt: 0,
    fractureLatched: false,
    outcome: null,
    taskRunning: false,
  };
}

/** Fold one state frame into the store; the fracture flag only latches on. */
export function applyFrame(
  state: ViewState,
  frame: StateFrame,
  nowMs: number,
): ViewState {
  return {
    ...state,
    frame,
    frameReceivedAt: nowMs,
    fractureLatched: state.fractureLatched || frame.fracture,
    outcome: frame.outcome ?? state.outcome,
    taskRunning: frame.phase !== "terminated",
  };
}

export function isStalled(state: ViewState, nowMs: number): boolean {
  return (
    state.frame !== null && nowMs - state.frameReceivedAt > STALE_FRAME_MS
  );
}

export function forceMagnitude(frame: StateFrame): number {
  const [fx, fy, fz] = frame.force;
  return Math.sqrt(fx * fx + fy * fy + fz * fz);
}

/** Gauge fill in [0, 1]; 1 means the 3.3 N device limit. */
export function gaugeFraction(frame: StateFrame): number {
  return Math.min(forceMagnitude(frame) / FORCE_LIMIT_N, 1);
}

export interface SceneLayout {
  /** floor patch footprint in canvas px */
  floorRect: { x: number; y: number; w: number; h: number };
  goalPx: { x: number; y: number; r: number };
  toolPx: { x: number; y: number };
  depthMm: number;
  forbiddenDepthMm: number;
  goalDepthMm: number;
}

/** Pure projection of the default scene plus the tool tip onto the canvas. */
export function layoutScene(
  frame: StateFrame,
  mapping: InputMapping,
): SceneLayout {
  const floorTopLeft = unmapPointer([-20, 20, 0], mapping);
  const floorBottomRight = unmapPointer([20, -20, 0], mapping);
  const goal = unmapPointer([0, 0, -25], mapping);
  const goalEdge = unmapPointer([2, 0, -25], mapping);
  const tool = unmapPointer(frame.position, mapping);
  return {
    floorRect: {
      x: floorTopLeft.canvasX,
      y: floorTopLeft.canvasY,
      w: floorBottomRight.canvasX - floorTopLeft.canvasX,
      h: floorBottomRight.canvasY - floorTopLeft.canvasY,
    },
    goalPx: { x: goal.canvasX, y: goal.canvasY, r: goalEdge.canvasX - goal.canvasX },
    toolPx: { x: tool.canvasX, y: tool.canvasY },
    depthMm: frame.position[2],
    forbiddenDepthMm: -30,
    goalDepthMm: -25,
  };
}

export function renderFrame(
  ctx: CanvasRenderingContext2D,
  state: ViewState,
  mapping: InputMapping,
  nowMs: number,
): void {
  ctx.clearRect(0, 0, mapping.canvasWidth, mapping.canvasHeight);
  const frame = state.frame;
  if (frame === null) {
    ctx.fillStyle = "#666";
    ctx.fillText("waiting for telemetry...", 20, 30);
    return;
  }
  const layout = layoutScene(frame, mapping);

  ctx.strokeStyle = frame.contacts.floor ? "#c96" : "#999";
  ctx.strokeRect(
    layout.floorRect.x,
    layout.floorRect.y,
    layout.floorRect.w,
    layout.floorRect.h,
  );

  ctx.beginPath();
  ctx.arc(layout.goalPx.x, layout.goalPx.y, layout.goalPx.r, 0, 2 * Math.PI);
  ctx.strokeStyle = frame.contacts.goal ? "#2a2" : "#494";
  ctx.stroke();

  ctx.beginPath();
  ctx.arc(layout.toolPx.x, layout.toolPx.y, 4, 0, 2 * Math.PI);
  ctx.fillStyle = frame.contacts.forbidden ? "#d22" : "#226";
  ctx.fill();

  ctx.fillStyle = "#222";
  ctx.fillText(`depth ${layout.depthMm.toFixed(1)} mm`, 20, 20);
  ctx.fillText(
    `force ${forceMagnitude(frame).toFixed(2)} / ${FORCE_LIMIT_N} N`,
    20,
    40,
  );

  if (state.fractureLatched) {
    ctx.fillStyle = "#d22";
    ctx.fillText("FRACTURED", 20, 60);
  }
  if (state.outcome !== null) {
    ctx.fillStyle = state.outcome === "success" ? "#2a2" : "#d22";
    ctx.fillText(`outcome: ${state.outcome}`, 20, 80);
  }
  if (isStalled(state, nowMs)) {
    ctx.fillStyle = "rgba(0,0,0,0.5)";
    ctx.fillRect(0, 0, mapping.canvasWidth, mapping.canvasHeight);
    ctx.fillStyle = "#fff";
    ctx.fillText("stalled", mapping.canvasWidth / 2 - 20, 30);
  }
}
