/**
 * Websocket client: steering input out, telemetry in.
 *
 * Pose messages are throttled to 120 Hz (the engine keeps only the
 * latest anyway). Incoming frames are folded into the view-state store
 * via a single callback, keeping the network layer free of DOM code.
 */

import {
  decode,
  encode,
  PoseIn,
  StateFrame,
  TaskControl,
  QuestionnaireMsg,
  ErrorMsg,
  WireFormatError,
} from "./protocol.js";
import { RateLimiter } from "./input.js";

export interface ClientCallbacks {
  onFrame(frame: StateFrame): void;
  onError(message: string): void;
  onStatus(connected: boolean): void;
}

export class TrainerClient {
  private ws: WebSocket | null = null;
  private readonly limiter = new RateLimiter();

  constructor(
    private readonly url: string,
    private readonly callbacks: ClientCallbacks,
  ) {}

  connect(): void {
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => this.callbacks.onStatus(true);
    this.ws.onclose = () => this.callbacks.onStatus(false);
    this.ws.onerror = () => this.callbacks.onStatus(false);
    this.ws.onmessage = (event) => {
      let msg;
      try {
        msg = decode(event.data as string);
      } catch (err) {
        if (err instanceof WireFormatError) {
          this.callbacks.onError(`bad frame from server: ${err.message}`);
          return;
        }
        throw err;
      }
      if (msg.kind === "state_frame") {
        this.callbacks.onFrame(msg);
      } else if (msg.kind === "error") {
        this.callbacks.onError((msg as ErrorMsg).message);
      }
    };
  }

  private send(text: string): void {
    if (this.ws !== null && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(text);
    }
  }

  /** Throttled; drops sends beyond the 120 Hz budget. */
  sendPose(pose: PoseIn, nowMs: number): boolean {
    if (!this.limiter.allow(nowMs)) return false;
    this.send(encode(pose));
    return true;
  }

  startTask(taskKind: string, level: number | null, seed: number): void {
    const msg: TaskControl = {
      kind: "task_control",
      action: "start",
      task: { kind: taskKind, level, seed },
    };
    this.send(encode(msg));
  }

  abortTask(): void {
    this.send(
      encode({
        kind: "task_control",
        action: "abort",
        task: { kind: "evaluation", level: null, seed: 0 },
      }),
    );
  }

  sendQuestionnaire(messages: QuestionnaireMsg[]): void {
    for (const msg of messages) {
      this.send(encode(msg));
    }
  }
}
