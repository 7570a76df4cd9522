/**
 * Post-evaluation questionnaire form model.
 *
 * Three scored items on a 0-10 scale plus a free-text comment. Scores
 * are validated client-side before any message is built; the form only
 * clears after the server acknowledges every message.
 */

import { QuestionnaireMsg } from "./protocol.js";

export const QUESTIONNAIRE_ITEMS = [
  "How users will sense the fracture during the operation",
  "How users will sense the tissue hardening effect of tool interaction with the tissues",
  "How effective will be the developed platform for education",
] as const;

export interface QuestionnaireForm {
  scores: Map<string, number | null>;
  comment: string;
}

export function emptyForm(): QuestionnaireForm {
  return {
    scores: new Map(QUESTIONNAIRE_ITEMS.map((item) => [item, null])),
    comment: "",
  };
}

export interface FieldError {
  item: string;
  message: string;
}

/** Field-level validation; an unfilled score is an error, 0-10 inclusive. */
export function validateForm(form: QuestionnaireForm): FieldError[] {
  const errors: FieldError[] = [];
  for (const item of QUESTIONNAIRE_ITEMS) {
    const score = form.scores.get(item);
    if (score === null || score === undefined) {
      errors.push({ item, message: "score required" });
    } else if (!Number.isFinite(score) || score < 0 || score > 10) {
      errors.push({ item, message: `score must be in [0, 10], got ${score}` });
    }
  }
  return errors;
}

/** One message per scored item plus one for the free-text comment. */
export function buildMessages(form: QuestionnaireForm): QuestionnaireMsg[] {
  const errors = validateForm(form);
  if (errors.length > 0) {
    throw new Error(`form invalid: ${errors[0].item}: ${errors[0].message}`);
  }
  const messages: QuestionnaireMsg[] = QUESTIONNAIRE_ITEMS.map((item) => ({
    kind: "questionnaire",
    item,
    score: form.scores.get(item) as number,
    text: "",
  }));
  if (form.comment.trim().length > 0) {
    messages.push({
      kind: "questionnaire",
      item: "comments",
      score: null,
      text: form.comment,
    });
  }
  return messages;
}
