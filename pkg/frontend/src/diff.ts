/** Proposal rendering: the patch as before/after lines plus cost chips. */

import type { RepairResultDoc } from "./api.js";
import { costChips } from "./model.js";

export function renderProposal(
  container: HTMLElement,
  result: RepairResultDoc,
): void {
  container.textContent = "";
  if (result.status === "no_repair") {
    const note = document.createElement("div");
    note.className = "no-repair";
    note.textContent =
      "No more repairs" + (result.reason ? ` (${result.reason})` : "");
    container.appendChild(note);
    return;
  }
  if (result.status === "timeout") {
    const note = document.createElement("div");
    note.className = "timeout";
    note.textContent = "The search timed out on the server.";
    container.appendChild(note);
    return;
  }

  const chips = document.createElement("div");
  chips.className = "cost-chips";
  for (const chip of costChips(result)) {
    const el = document.createElement("span");
    el.className = `chip chip-${chip.label}`;
    el.textContent = `${chip.label} ${chip.value}`;
    chips.appendChild(el);
  }
  container.appendChild(chips);

  const list = document.createElement("div");
  list.className = "patch";
  for (const entry of result.patch) {
    const block = document.createElement("div");
    block.className = "patch-entry";
    block.dataset.line = String(entry.line);

    const where = document.createElement("div");
    where.className = "patch-line";
    where.textContent = `line ${entry.line}`;
    block.appendChild(where);

    const before = document.createElement("div");
    before.className = "patch-before";
    before.textContent = `- ${entry.before}`;
    block.appendChild(before);

    const after = document.createElement("div");
    after.className = "patch-after";
    after.textContent = `+ ${entry.after}`;
    block.appendChild(after);

    list.appendChild(block);
  }
  container.appendChild(list);

  if (result.satisfying_index !== null) {
    const note = document.createElement("div");
    note.className = "satisfying-step";
    note.textContent =
      `reaches the edited state at step ${result.satisfying_index}`;
    container.appendChild(note);
  }
}
