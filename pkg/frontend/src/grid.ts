/**
 * Trace table rendering: variables as rows, steps as columns (picking the
 * edit step is the core gesture, so every step is visible at once).
 * Cells at the selected step become editable for non-input variables.
 */

import type { TraceResponse, Value } from "./api.js";
import {
  ManipulationDraft,
  UNDEFINED_MARK,
  formatValue,
  variableOrder,
} from "./model.js";

export interface GridCallbacks {
  onSelectStep(step: number): void;
  onEditCell(variable: string, text: string): void;
  onToggleWildcard(variable: string): void;
}

export function renderGrid(
  container: HTMLElement,
  trace: TraceResponse,
  inputVars: ReadonlySet<string>,
  selected: number | null,
  draft: ManipulationDraft | null,
  callbacks: GridCallbacks,
): void {
  container.textContent = "";
  const table = document.createElement("table");
  table.className = "trace-grid";

  const head = table.createTHead().insertRow();
  head.appendChild(cellOf("th", "step"));
  for (const s of trace.steps) {
    const th = cellOf("th", String(s.step));
    th.classList.add("step-header");
    if (s.step === selected) th.classList.add("selected");
    th.dataset.step = String(s.step);
    th.addEventListener("click", () => callbacks.onSelectStep(s.step));
    head.appendChild(th);
  }

  const locRow = table.createTBody().insertRow();
  locRow.appendChild(cellOf("th", "line"));
  for (const s of trace.steps) {
    const td = cellOf("td", s.loc === "exit" ? "exit" : String(s.loc));
    td.className = "loc-cell";
    if (s.step === selected) td.classList.add("selected");
    locRow.appendChild(td);
  }

  const body = table.tBodies[0];
  for (const variable of variableOrder(trace)) {
    const row = body.insertRow();
    const label = cellOf("th", variable);
    if (inputVars.has(variable)) {
      label.classList.add("input-var");
      label.title = "input variable: not editable";
    }
    row.appendChild(label);
    for (const s of trace.steps) {
      const value = s.vars[variable] ?? null;
      const td = document.createElement("td");
      td.dataset.variable = variable;
      td.dataset.step = String(s.step);
      if (s.step === selected) td.classList.add("selected");
      if (
        s.step === selected &&
        draft !== null &&
        draft.canEdit(variable)
      ) {
        renderEditableCell(td, variable, value, draft, callbacks);
      } else {
        td.textContent = formatValue(value);
        if (value === null) td.classList.add("undefined");
      }
      row.appendChild(td);
    }
  }
  container.appendChild(table);
  if (!trace.terminated) {
    const badge = document.createElement("div");
    badge.className = "truncated-badge";
    badge.textContent = "trace truncated (fuel limit reached)";
    container.appendChild(badge);
  }
}

function renderEditableCell(
  td: HTMLTableCellElement,
  variable: string,
  value: Value,
  draft: ManipulationDraft,
  callbacks: GridCallbacks,
): void {
  td.classList.add("editable");
  const input = document.createElement("input");
  input.type = "text";
  input.className = "cell-edit";
  input.dataset.variable = variable;
  const edit = draft.edits.get(variable);
  if (edit?.mode === "set") {
    input.value = formatValue(edit.value ?? null);
    td.classList.add("edited");
  } else if (edit?.mode === "any") {
    input.value = "?";
    td.classList.add("wildcarded");
  } else {
    input.value = formatValue(value);
  }
  input.addEventListener("change", () =>
    callbacks.onEditCell(variable, input.value),
  );
  td.appendChild(input);

  const wildcard = document.createElement("button");
  wildcard.type = "button";
  wildcard.className = "wildcard-toggle";
  wildcard.textContent = "?";
  wildcard.title = "don't care about this variable";
  wildcard.addEventListener("click", () =>
    callbacks.onToggleWildcard(variable),
  );
  td.appendChild(wildcard);
}

export function renderProgram(
  container: HTMLElement,
  source: string,
  highlightLine: number | null,
): void {
  container.textContent = "";
  const pre = document.createElement("pre");
  pre.className = "program-listing";
  source.split("\n").forEach((text, i) => {
    const line = document.createElement("div");
    line.className = "program-line";
    if (i + 1 === highlightLine) line.classList.add("current-line");
    const no = document.createElement("span");
    no.className = "line-number";
    no.textContent = String(i + 1).padStart(3, " ");
    line.appendChild(no);
    line.appendChild(document.createTextNode(" " + text));
    pre.appendChild(line);
  });
  container.appendChild(pre);
}

function cellOf(tag: "th" | "td", text: string): HTMLTableCellElement {
  const el = document.createElement(tag) as HTMLTableCellElement;
  el.textContent = text;
  return el;
}
