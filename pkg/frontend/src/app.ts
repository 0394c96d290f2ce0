/**
 * Wiring: load a program and input, trace it, pick a step, edit values,
 * submit, then accept the proposed patch or ask for a different one.
 */

import { ApiClient, ApiError } from "./api.js";
import type {
  RepairResultDoc,
  TraceResponse,
  Value,
} from "./api.js";
import { renderProposal } from "./diff.js";
import { renderGrid, renderProgram } from "./grid.js";
import { ManipulationDraft, findStep, parseValueText } from "./model.js";

interface AppState {
  program: string;
  input: Record<string, Value>;
  trace: TraceResponse | null;
  selected: number | null;
  draft: ManipulationDraft | null;
  sessionId: string | null;
  proposal: RepairResultDoc | null;
  solving: boolean;
}

const state: AppState = {
  program: "",
  input: {},
  trace: null,
  selected: null,
  draft: null,
  sessionId: null,
  proposal: null,
  solving: false,
};

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function banner(message: string, kind: "error" | "info" = "error"): void {
  const box = el<HTMLDivElement>("banner");
  box.textContent = message;
  box.className = message ? `banner ${kind}` : "banner hidden";
}

function redraw(): void {
  const highlight =
    state.trace && state.selected !== null
      ? state.trace.steps[state.selected]?.loc
      : null;
  renderProgram(
    el("program-panel"),
    state.program,
    typeof highlight === "number" ? highlight : null,
  );
  if (state.trace) {
    renderGrid(
      el("grid-panel"),
      state.trace,
      new Set(Object.keys(state.input)),
      state.selected,
      state.draft,
      {
        onSelectStep: selectStep,
        onEditCell: editCell,
        onToggleWildcard: toggleWildcard,
      },
    );
  }
  const submit = el<HTMLButtonElement>("submit-edit");
  submit.disabled =
    state.solving || !(state.draft && state.draft.isSubmittable());
  el<HTMLDivElement>("proposal-panel").classList.toggle(
    "hidden",
    state.proposal === null,
  );
  if (state.proposal) {
    renderProposal(el("proposal-body"), state.proposal);
    const actions = el<HTMLDivElement>("proposal-actions");
    actions.classList.toggle("hidden", state.proposal.status !== "repaired");
  }
}

function selectStep(step: number): void {
  state.selected = step;
  state.draft = new ManipulationDraft(step, new Set(Object.keys(state.input)));
  redraw();
}

function editCell(variable: string, text: string): void {
  if (!state.draft || !state.trace || state.selected === null) return;
  const current = state.trace.steps[state.selected].vars[variable] ?? null;
  const trimmed = text.trim();
  if (trimmed === "?") {
    state.draft.setWildcard(variable);
    redraw();
    return;
  }
  try {
    const value = parseValueText(text, current);
    if (JSON.stringify(value) === JSON.stringify(current)) {
      state.draft.clear(variable);
    } else {
      state.draft.setValue(variable, value);
    }
    banner("");
  } catch (err) {
    banner(`${variable}: ${(err as Error).message}`);
  }
  redraw();
}

function toggleWildcard(variable: string): void {
  if (!state.draft) return;
  if (state.draft.edits.get(variable)?.mode === "any") {
    state.draft.clear(variable);
  } else {
    state.draft.setWildcard(variable);
  }
  redraw();
}

async function loadAndTrace(): Promise<void> {
  banner("");
  state.program = el<HTMLTextAreaElement>("program-input").value;
  try {
    state.input = JSON.parse(el<HTMLInputElement>("input-json").value);
  } catch {
    banner("the input valuation must be JSON, e.g. {\"x\": [9, 5, 4]}");
    return;
  }
  state.trace = null;
  state.selected = null;
  state.draft = null;
  state.proposal = null;
  state.sessionId = null;
  try {
    state.trace = await api.trace(state.program, state.input);
  } catch (err) {
    if (err instanceof ApiError) {
      banner(err.message);
      const body = err.body as TraceResponse | undefined;
      if (body && Array.isArray(body.steps)) state.trace = body;
    } else {
      banner(String(err));
    }
  }
  redraw();
}

async function submitEdit(): Promise<void> {
  if (!state.draft || state.selected === null) return;
  state.solving = true;
  banner("solving…", "info");
  redraw();
  try {
    const response = await api.openSession(state.program, {
      input: state.input,
      index: state.selected,
      values: state.draft.toRequestValues(),
    });
    state.sessionId = response.session_id;
    state.proposal = response.result;
    banner("");
  } catch (err) {
    banner(err instanceof ApiError ? err.message : String(err));
  } finally {
    state.solving = false;
  }
  redraw();
}

async function rejectProposal(kind: "patch" | "location"): Promise<void> {
  if (!state.sessionId || !state.proposal) return;
  let location: number | undefined;
  if (kind === "location") {
    location = state.proposal.patch[0]?.line;
    if (location === undefined) return;
  }
  state.solving = true;
  banner("solving…", "info");
  redraw();
  try {
    const response = await api.reject(state.sessionId, kind, location);
    state.proposal = response.result;
    banner("");
  } catch (err) {
    banner(err instanceof ApiError ? err.message : String(err));
  } finally {
    state.solving = false;
  }
  redraw();
}

async function acceptProposal(): Promise<void> {
  const proposal = state.proposal;
  if (!proposal || proposal.status !== "repaired" || !proposal.patched_source) {
    return;
  }
  const patched = proposal.patched_source;
  downloadText("repaired.mj", patched);
  // re-trace the accepted program and highlight the satisfying step
  state.program = patched;
  el<HTMLTextAreaElement>("program-input").value = patched;
  state.proposal = null;
  state.sessionId = null;
  try {
    state.trace = await api.trace(patched, state.input);
    state.selected = proposal.satisfying_index;
    state.draft = null;
    banner(
      proposal.satisfying_index !== null
        ? `repaired program reaches the edited state at step ${proposal.satisfying_index}`
        : "repaired program loaded",
      "info",
    );
  } catch (err) {
    banner(err instanceof ApiError ? err.message : String(err));
  }
  redraw();
}

function downloadText(filename: string, text: string): void {
  const blob = new Blob([text], { type: "text/plain" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = filename;
  a.click();
  URL.revokeObjectURL(a.href);
}

export function start(): void {
  el<HTMLButtonElement>("load-trace").addEventListener("click", () => {
    void loadAndTrace();
  });
  el<HTMLButtonElement>("submit-edit").addEventListener("click", () => {
    void submitEdit();
  });
  el<HTMLButtonElement>("accept").addEventListener("click", () => {
    void acceptProposal();
  });
  el<HTMLButtonElement>("reject-patch").addEventListener("click", () => {
    void rejectProposal("patch");
  });
  el<HTMLButtonElement>("reject-line").addEventListener("click", () => {
    void rejectProposal("location");
  });
  redraw();
}

start();
