import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import { validateAct } from "../src/validate.js";
import { draftErrors, submitDraft } from "../src/pick.js";
import type { AnnotationDraft } from "../src/pick.js";
import type { Force, ForceKind, RefKind, Utterance } from "../src/types.js";
import { fixture } from "./helpers.js";

interface Vector {
  force: Force;
  utterance: Utterance;
  references: [ForceKind, RefKind][];
  violations: string[];
}

const VECTORS = JSON.parse(readFileSync(fixture("act_vectors.json"), "utf-8")) as Vector[];

describe("client-side act grammar", () => {
  it("matches the backend on every shared fixture vector", () => {
    expect(VECTORS.length).toBeGreaterThanOrEqual(400);
    for (const vector of VECTORS) {
      const got = validateAct(vector.force, vector.utterance, vector.references);
      expect(got, JSON.stringify(vector)).toEqual(vector.violations);
    }
  });

  it("covers both outcomes in the vector set", () => {
    const ok = VECTORS.filter((v) => v.violations.length === 0).length;
    expect(ok).toBeGreaterThan(100);
    expect(VECTORS.length - ok).toBeGreaterThan(100);
  });
});

describe("draft form gatekeeping", () => {
  const base: AnnotationDraft = {
    anchor: { face: 2, bary: [0.5, 0.25, 0.25], normal_offset: 0 },
    force_kind: "Evaluation",
    polarity: "Negative",
    content_kind: "Constraint",
    text: "interference at the exhaust tubes level",
    sphere: "Public",
    references: [],
  };

  it("a complete valid draft submits", () => {
    expect(draftErrors(base)).toEqual([]);
    const body = submitDraft(base);
    expect(body.force).toEqual({ kind: "Evaluation", polarity: "Negative" });
    expect(body.utterance.text).toBe(base.text);
  });

  it("empty utterance is caught before any request", () => {
    expect(draftErrors({ ...base, text: "   " })).toContain("EMPTY_UTTERANCE");
    expect(() => submitDraft({ ...base, text: "" })).toThrow(/EMPTY_UTTERANCE/);
  });

  it("clarification without subtype is caught", () => {
    const draft: AnnotationDraft = {
      ...base,
      force_kind: "Clarification",
      polarity: undefined,
    };
    expect(draftErrors(draft)).toContain("CLARIFICATION_KIND_REQUIRED");
  });

  it("missing required fields are reported", () => {
    const draft: AnnotationDraft = { anchor: base.anchor, text: "", references: [] };
    const errors = draftErrors(draft);
    expect(errors).toContain("FORCE_KIND_REQUIRED");
    expect(errors).toContain("SPHERE_REQUIRED");
    expect(errors).toContain("EMPTY_UTTERANCE");
  });

  it("every draft the client accepts passes the shared grammar", () => {
    // property check: sample drafts whose errors are empty and confirm the
    // submission body validates under the same rules as the backend vectors
    for (const vector of VECTORS) {
      if (vector.violations.length > 0) continue;
      const draft: AnnotationDraft = {
        anchor: base.anchor,
        force_kind: vector.force.kind,
        clarification_kind: vector.force.clarification_kind,
        polarity: vector.force.polarity,
        content_kind: vector.utterance.content_kind,
        text: vector.utterance.text,
        sphere: "Public",
        references: vector.references.map(([targetKind, kind], i) => ({
          target: `t${i}`,
          target_kind: targetKind,
          kind,
        })),
      };
      expect(draftErrors(draft)).toEqual([]);
      const body = submitDraft(draft);
      expect(
        validateAct(body.force, body.utterance, vector.references),
      ).toEqual([]);
    }
  });
});
