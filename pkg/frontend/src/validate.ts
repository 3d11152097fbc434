/** Client-side mirror of the server's act grammar.
 *
 * Used to reject bad submissions before any request is sent; every draft
 * this module accepts must also be accepted by the server (checked against
 * shared fixture vectors in the tests).
 */

import type { Force, ForceKind, RefKind, Utterance } from "./types.js";

export const EMPTY_UTTERANCE = "EMPTY_UTTERANCE";
export const CLARIFICATION_KIND_REQUIRED = "CLARIFICATION_KIND_REQUIRED";
export const CLARIFICATION_KIND_FORBIDDEN = "CLARIFICATION_KIND_FORBIDDEN";
export const POLARITY_FORBIDDEN = "POLARITY_FORBIDDEN";
export const VALIDATES_SOURCE_NOT_VALIDATION = "VALIDATES_SOURCE_NOT_VALIDATION";
export const VALIDATES_TARGET_NOT_PROPOSITION = "VALIDATES_TARGET_NOT_PROPOSITION";
export const ANSWERS_SOURCE_NOT_PROPOSITION = "ANSWERS_SOURCE_NOT_PROPOSITION";

export function validateAct(
  force: Force,
  utterance: Utterance,
  references: [ForceKind, RefKind][] = [],
): string[] {
  const violations: string[] = [];
  const add = (code: string) => {
    if (!violations.includes(code)) violations.push(code);
  };

  if (!utterance.text || utterance.text.trim() === "") add(EMPTY_UTTERANCE);

  if (force.kind === "Clarification") {
    if (force.clarification_kind == null) add(CLARIFICATION_KIND_REQUIRED);
  } else if (force.clarification_kind != null) {
    add(CLARIFICATION_KIND_FORBIDDEN);
  }

  if (force.polarity != null && force.kind !== "Evaluation") add(POLARITY_FORBIDDEN);

  for (const [targetKind, refKind] of references) {
    if (refKind === "Validates") {
      if (force.kind !== "Validation") add(VALIDATES_SOURCE_NOT_VALIDATION);
      if (targetKind !== "Proposition") add(VALIDATES_TARGET_NOT_PROPOSITION);
    } else if (refKind === "Answers" && force.kind !== "Proposition") {
      add(ANSWERS_SOURCE_NOT_PROPOSITION);
    }
  }
  return violations;
}
