/**
 * Client-side state: the trace grid model and the edit draft. The grid
 * mirrors the trace payload exactly; the draft enforces that edits touch
 * only non-input variables at a single step and that at least one real
 * value is set before submission.
 */

import type { TraceResponse, TraceStep, Value } from "./api.js";

export const UNDEFINED_MARK = "—";

export function formatValue(v: Value): string {
  if (v === null) return UNDEFINED_MARK;
  if (Array.isArray(v)) return "[" + v.map((x) => String(x)).join(", ") + "]";
  if (typeof v === "boolean") return v ? "true" : "false";
  if (typeof v === "string") return `'${v}'`;
  return String(v);
}

/** Stable variable order: exactly the order of the first step's payload. */
export function variableOrder(trace: TraceResponse): string[] {
  if (trace.steps.length === 0) return [];
  return Object.keys(trace.steps[0].vars);
}

export function parseValueText(text: string, sample: Value): Value {
  const t = text.trim();
  if (t === "" ) throw new Error("empty value");
  if (t === UNDEFINED_MARK || t === "null") return null;
  if (Array.isArray(sample) || t.startsWith("[")) {
    const parsed = JSON.parse(t) as unknown;
    if (!Array.isArray(parsed)) throw new Error("expected an array");
    return parsed as Value;
  }
  if (typeof sample === "boolean" || t === "true" || t === "false") {
    if (t !== "true" && t !== "false") throw new Error("expected true/false");
    return t === "true";
  }
  if (typeof sample === "string" || t.startsWith("'")) {
    const m = /^'(.)'$/.exec(t);
    if (!m) throw new Error("expected a character like 'a'");
    return m[1];
  }
  const n = Number(t);
  if (!Number.isInteger(n)) throw new Error("expected an integer");
  return n;
}

export type EditMode = "keep" | "set" | "any";

export interface Edit {
  mode: EditMode;
  value?: Value;
}

export class ManipulationDraft {
  readonly edits = new Map<string, Edit>();

  constructor(
    readonly step: number,
    readonly inputVars: ReadonlySet<string>,
  ) {}

  canEdit(variable: string): boolean {
    return !this.inputVars.has(variable);
  }

  setValue(variable: string, value: Value): void {
    if (!this.canEdit(variable)) {
      throw new Error(`${variable} is an input variable and cannot be edited`);
    }
    this.edits.set(variable, { mode: "set", value });
  }

  setWildcard(variable: string): void {
    if (!this.canEdit(variable)) {
      throw new Error(`${variable} is an input variable and cannot be edited`);
    }
    this.edits.set(variable, { mode: "any" });
  }

  clear(variable: string): void {
    this.edits.delete(variable);
  }

  /** Submission needs at least one concrete value. */
  isSubmittable(): boolean {
    for (const e of this.edits.values()) if (e.mode === "set") return true;
    return false;
  }

  toRequestValues(): Record<string, Value | "?"> {
    const out: Record<string, Value | "?"> = {};
    for (const [name, edit] of this.edits) {
      if (edit.mode === "set") out[name] = edit.value ?? null;
      else if (edit.mode === "any") out[name] = "?";
    }
    return out;
  }
}

/** First trace index at the given line where the predicate holds. */
export function findStep(
  trace: TraceResponse,
  loc: number | "exit",
  pred: (step: TraceStep) => boolean = () => true,
): number | null {
  for (const s of trace.steps) {
    if (s.loc === loc && pred(s)) return s.step;
  }
  return null;
}

export function costChips(result: {
  syntactic: number | null;
  semantic: number | null;
  cost: number | null;
}): Array<{ label: string; value: number }> {
  if (
    result.syntactic === null ||
    result.semantic === null ||
    result.cost === null
  ) {
    return [];
  }
  return [
    { label: "syntactic", value: result.syntactic },
    { label: "semantic", value: result.semantic },
    { label: "total", value: result.cost },
  ];
}
