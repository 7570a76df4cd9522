/** Page bootstrap: canvas steering, task panel, questionnaire form. */

import { TrainerClient } from "./client.js";
import {
  DEFAULT_MAPPING,
  DepthAccumulator,
  mapPointer,
} from "./input.js";
import {
  QUESTIONNAIRE_ITEMS,
  QuestionnaireForm,
  buildMessages,
  emptyForm,
  validateForm,
} from "./questionnaire.js";
import { applyFrame, initialViewState, renderFrame } from "./view.js";

const WS_URL =
  new URLSearchParams(location.search).get("ws") ??
  `ws://${location.hostname || "127.0.0.1"}:8765/ws?role=steer`;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el as T;
}

function main(): void {
  const canvas = byId<HTMLCanvasElement>("scene");
  const ctx = canvas.getContext("2d");
  if (ctx === null) throw new Error("2d canvas unsupported");
  const banner = byId<HTMLDivElement>("banner");
  const qPanel = byId<HTMLDivElement>("questionnaire");

  const mapping = {
    ...DEFAULT_MAPPING,
    canvasWidth: canvas.width,
    canvasHeight: canvas.height,
  };
  const depth = new DepthAccumulator(mapping, 5);
  let state = initialViewState();
  let taskRunningBefore = false;

  const client = new TrainerClient(WS_URL, {
    onFrame(frame) {
      state = applyFrame(state, frame, performance.now());
      if (taskRunningBefore && !state.taskRunning) {
        banner.textContent = `task finished: ${state.outcome ?? "aborted"}`;
        qPanel.style.display = "block";
      }
      taskRunningBefore = state.taskRunning;
    },
    onError(message) {
      banner.textContent = `server: ${message}`;
    },
    onStatus(connected) {
      state = {
        ...state,
        connection: connected ? "connected" : "disconnected",
      };
      banner.textContent = connected
        ? "connected"
        : "disconnected - input suppressed";
    },
  });
  client.connect();

  canvas.addEventListener("pointermove", (ev) => {
    if (state.connection !== "connected" || !state.taskRunning) return;
    const rect = canvas.getBoundingClientRect();
    const pose = mapPointer(
      ev.clientX - rect.left,
      ev.clientY - rect.top,
      depth.value(),
      mapping,
      performance.now() / 1000,
    );
    client.sendPose(pose, performance.now());
  });

  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    depth.notch(ev.deltaY > 0 ? -1 : 1);
  });

  byId<HTMLButtonElement>("start").addEventListener("click", () => {
    const kind = byId<HTMLSelectElement>("task-kind").value;
    const levelRaw = byId<HTMLSelectElement>("task-level").value;
    const level = levelRaw === "random" ? null : Number(levelRaw);
    state = initialViewState();
    state.connection = "connected";
    qPanel.style.display = "none";
    client.startTask(kind, level, Date.now() >>> 0);
  });
  byId<HTMLButtonElement>("abort").addEventListener("click", () => {
    client.abortTask();
  });

  // questionnaire form
  const form: QuestionnaireForm = emptyForm();
  const list = byId<HTMLDivElement>("q-items");
  for (const item of QUESTIONNAIRE_ITEMS) {
    const row = document.createElement("label");
    row.textContent = item;
    const input = document.createElement("input");
    input.type = "number";
    input.min = "0";
    input.max = "10";
    input.step = "1";
    input.addEventListener("input", () => {
      const value = input.value === "" ? null : Number(input.value);
      form.scores.set(item, value);
      const bad = validateForm(form).some((e) => e.item === item);
      input.style.borderColor = bad ? "#d22" : "";
    });
    row.appendChild(input);
    list.appendChild(row);
  }
  const commentBox = byId<HTMLTextAreaElement>("q-comment");
  byId<HTMLButtonElement>("q-submit").addEventListener("click", () => {
    form.comment = commentBox.value;
    const errors = validateForm(form);
    if (errors.length > 0) {
      banner.textContent = `${errors[0].item}: ${errors[0].message}`;
      return;
    }
    client.sendQuestionnaire(buildMessages(form));
    banner.textContent = "questionnaire submitted";
    qPanel.style.display = "none";
  });

  const paint = () => {
    renderFrame(ctx, state, mapping, performance.now());
    requestAnimationFrame(paint);
  };
  paint();
}

main();
