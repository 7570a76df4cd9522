/**
 * Wire protocol shared with the engine endpoint.
 *
 * Every message is a JSON object carrying `v` (protocol version) and
 * `kind`. Encoding/decoding is strict: a message that fails validation
 * is never sent, and unknown or mismatched frames raise instead of
 * passing through.
 */

export const PROTOCOL_VERSION = 1;

export type Vec3 = [number, number, number];

export interface PoseIn {
  kind: "pose_in";
  t: number;
  position: Vec3;
}

export interface StateFrame {
  kind: "state_frame";
  tick: number;
  position: Vec3;
  force: Vec3;
  fracture: boolean;
  contacts: { floor: boolean; goal: boolean; forbidden: boolean };
  phase: "idle" | "in_contact" | "terminated";
  scene_id: string;
  outcome: string | null;
}

export interface TaskControl {
  kind: "task_control";
  action: "start" | "abort";
  task: { kind: string; level: number | null; seed: number };
}

export interface QuestionnaireMsg {
  kind: "questionnaire";
  item: string;
  score: number | null;
  text: string;
}

export interface ErrorMsg {
  kind: "error";
  message: string;
}

export type WireMessage =
  | PoseIn
  | StateFrame
  | TaskControl
  | QuestionnaireMsg
  | ErrorMsg;

export class WireFormatError extends Error {}
export class WireVersionError extends WireFormatError {}

function isVec3(raw: unknown): raw is Vec3 {
  return (
    Array.isArray(raw) &&
    raw.length === 3 &&
    raw.every((c) => typeof c === "number" && Number.isFinite(c))
  );
}

function validate(msg: WireMessage): void {
  switch (msg.kind) {
    case "pose_in":
      if (!Number.isFinite(msg.t) || !isVec3(msg.position)) {
        throw new WireFormatError("invalid pose_in payload");
      }
      return;
    case "state_frame":
      if (
        !Number.isInteger(msg.tick) ||
        !isVec3(msg.position) ||
        !isVec3(msg.force) ||
        typeof msg.fracture !== "boolean" ||
        typeof msg.contacts?.floor !== "boolean" ||
        typeof msg.contacts?.goal !== "boolean" ||
        typeof msg.contacts?.forbidden !== "boolean" ||
        !["idle", "in_contact", "terminated"].includes(msg.phase)
      ) {
        throw new WireFormatError("invalid state_frame payload");
      }
      return;
    case "task_control":
      if (!["start", "abort"].includes(msg.action)) {
        throw new WireFormatError(`invalid task action ${msg.action}`);
      }
      if (
        msg.task.level !== null &&
        (!Number.isInteger(msg.task.level) ||
          msg.task.level < 1 ||
          msg.task.level > 5)
      ) {
        throw new WireFormatError(`invalid level ${msg.task.level}`);
      }
      return;
    case "questionnaire":
      if (msg.score !== null) {
        if (!Number.isFinite(msg.score) || msg.score < 0 || msg.score > 10) {
          throw new WireFormatError(`score out of range [0, 10]: ${msg.score}`);
        }
      }
      if (typeof msg.item !== "string" || msg.item.length === 0) {
        throw new WireFormatError("questionnaire item missing");
      }
      return;
    case "error":
      if (typeof msg.message !== "string") {
        throw new WireFormatError("error message missing");
      }
      return;
    default:
      throw new WireFormatError(
        `unknown message kind ${(msg as { kind?: string }).kind}`,
      );
  }
}

export function encode(msg: WireMessage): string {
  validate(msg);
  return JSON.stringify({ v: PROTOCOL_VERSION, ...msg });
}

export function decode(text: string): WireMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new WireFormatError(`not valid JSON: ${err}`);
  }
  if (typeof raw !== "object" || raw === null) {
    throw new WireFormatError("message must be an object");
  }
  const payload = raw as { v?: unknown; kind?: unknown } & Record<
    string,
    unknown
  >;
  if (payload.v !== PROTOCOL_VERSION) {
    throw new WireVersionError(`unsupported protocol version ${payload.v}`);
  }
  const { v: _v, ...rest } = payload;
  const msg = rest as unknown as WireMessage;
  validate(msg);
  return msg;
}
