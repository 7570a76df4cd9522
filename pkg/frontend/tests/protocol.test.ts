import { describe, expect, it } from "vitest";

import {
  decode,
  encode,
  StateFrame,
  WireFormatError,
  WireMessage,
  WireVersionError,
} from "../src/protocol.js";

function mulberry32(seed: number): () => number {
  let a = seed;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function fuzzMessage(rng: () => number): WireMessage {
  const pick = <T>(xs: T[]): T => xs[Math.floor(rng() * xs.length)];
  const vec3 = (): [number, number, number] => [
    rng() * 40 - 20,
    rng() * 40 - 20,
    rng() * 45 - 35,
  ];
  switch (pick(["pose_in", "state_frame", "task_control", "questionnaire", "error"])) {
    case "pose_in":
      return { kind: "pose_in", t: rng() * 100, position: vec3() };
    case "state_frame":
      return {
        kind: "state_frame",
        tick: Math.floor(rng() * 1e6),
        position: vec3(),
        force: [0, 0, rng() * 3.3],
        fracture: rng() < 0.5,
        contacts: {
          floor: rng() < 0.5,
          goal: rng() < 0.1,
          forbidden: rng() < 0.1,
        },
        phase: pick(["idle", "in_contact", "terminated"]),
        scene_id: "default",
        outcome: pick([null, "success", "both"]),
      } satisfies StateFrame;
    case "task_control":
      return {
        kind: "task_control",
        action: pick(["start", "abort"]),
        task: {
          kind: "evaluation",
          level: pick([null, 1, 3, 5]),
          seed: Math.floor(rng() * 2 ** 31),
        },
      };
    case "questionnaire":
      return {
        kind: "questionnaire",
        item: "item",
        score: rng() * 10,
        text: "free text",
      };
    default:
      return { kind: "error", message: "boom" };
  }
}

describe("wire codec", () => {
  it("round-trips fuzzed messages of every kind", () => {
    const rng = mulberry32(42);
    for (let i = 0; i < 500; i++) {
      const msg = fuzzMessage(rng);
      expect(decode(encode(msg))).toEqual(msg);
    }
  });

  it("rejects truncated frames", () => {
    const text = encode({ kind: "pose_in", t: 0, position: [1, 2, 3] });
    expect(() => decode(text.slice(0, text.length / 2))).toThrow(
      WireFormatError,
    );
  });

  it("rejects unknown kinds", () => {
    expect(() => decode(JSON.stringify({ v: 1, kind: "mystery" }))).toThrow(
      WireFormatError,
    );
  });

  it("rejects future protocol versions", () => {
    expect(() =>
      decode(JSON.stringify({ v: 2, kind: "pose_in", t: 0, position: [0, 0, 0] })),
    ).toThrow(WireVersionError);
  });

  it("never encodes an out-of-range questionnaire score", () => {
    expect(() =>
      encode({ kind: "questionnaire", item: "x", score: 11, text: "" }),
    ).toThrow(WireFormatError);
    expect(() =>
      encode({ kind: "questionnaire", item: "x", score: -0.5, text: "" }),
    ).toThrow(WireFormatError);
  });

  it("matches the engine's JSON shape for pose messages", () => {
    const parsed = JSON.parse(
      encode({ kind: "pose_in", t: 1.5, position: [1, 2, 3] }),
    );
    expect(parsed).toEqual({
      v: 1,
      kind: "pose_in",
      t: 1.5,
      position: [1, 2, 3],
    });
  });
});
