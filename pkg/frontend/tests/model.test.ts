import { describe, expect, it } from "vitest";

import type { TraceResponse } from "../src/api.js";
import {
  ManipulationDraft,
  costChips,
  findStep,
  formatValue,
  parseValueText,
  variableOrder,
} from "../src/model.js";

const TRACE: TraceResponse = {
  steps: [
    { step: 0, loc: 2, vars: { x: [9, 5, 4], N: null, max: null } },
    { step: 1, loc: 3, vars: { x: [9, 5, 4], N: 3, max: null } },
    { step: 2, loc: "exit", vars: { x: [9, 5, 4], N: 3, max: 9 } },
  ],
  terminated: true,
};

describe("formatValue", () => {
  it("renders the undefined value as an em dash", () => {
    expect(formatValue(null)).toBe("—");
  });
  it("renders arrays, booleans, chars and ints", () => {
    expect(formatValue([9, 5, 4])).toBe("[9, 5, 4]");
    expect(formatValue(true)).toBe("true");
    expect(formatValue("a")).toBe("'a'");
    expect(formatValue(-3)).toBe("-3");
  });
});

describe("variableOrder", () => {
  it("follows the payload order of the first step", () => {
    expect(variableOrder(TRACE)).toEqual(["x", "N", "max"]);
  });
});

describe("parseValueText", () => {
  it("parses integers", () => {
    expect(parseValueText("42", 0)).toBe(42);
    expect(() => parseValueText("4.5", 0)).toThrow();
  });
  it("parses arrays against an array sample", () => {
    expect(parseValueText("[1, 2]", [0])).toEqual([1, 2]);
  });
  it("parses booleans and chars", () => {
    expect(parseValueText("true", false)).toBe(true);
    expect(parseValueText("'z'", "a")).toBe("z");
  });
  it("maps the dash and null to the undefined value", () => {
    expect(parseValueText("—", 0)).toBeNull();
  });
});

describe("ManipulationDraft", () => {
  it("refuses edits to input variables", () => {
    const draft = new ManipulationDraft(1, new Set(["x"]));
    expect(draft.canEdit("x")).toBe(false);
    expect(() => draft.setValue("x", 1)).toThrow(/input variable/);
    expect(draft.canEdit("max")).toBe(true);
  });

  it("requires at least one concrete value before submission", () => {
    const draft = new ManipulationDraft(1, new Set(["x"]));
    expect(draft.isSubmittable()).toBe(false);
    draft.setWildcard("max");
    expect(draft.isSubmittable()).toBe(false);
    draft.setValue("N", 9);
    expect(draft.isSubmittable()).toBe(true);
  });

  it("serializes set values and wildcards", () => {
    const draft = new ManipulationDraft(1, new Set(["x"]));
    draft.setValue("max", 9);
    draft.setWildcard("N");
    expect(draft.toRequestValues()).toEqual({ max: 9, N: "?" });
    draft.clear("N");
    expect(draft.toRequestValues()).toEqual({ max: 9 });
  });
});

describe("findStep", () => {
  it("finds the first step at a line matching a predicate", () => {
    expect(findStep(TRACE, 3)).toBe(1);
    expect(findStep(TRACE, "exit", (s) => s.vars.max === 9)).toBe(2);
    expect(findStep(TRACE, 99)).toBeNull();
  });
});

describe("costChips", () => {
  it("exposes the three cost numbers verbatim", () => {
    expect(costChips({ syntactic: 1, semantic: 3, cost: 4 })).toEqual([
      { label: "syntactic", value: 1 },
      { label: "semantic", value: 3 },
      { label: "total", value: 4 },
    ]);
    expect(costChips({ syntactic: null, semantic: null, cost: null })).toEqual(
      [],
    );
  });
});
