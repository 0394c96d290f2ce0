// @vitest-environment jsdom
import { beforeEach, describe, expect, it, vi } from "vitest";

import type { RepairResultDoc, TraceResponse } from "../src/api.js";
import { renderProposal } from "../src/diff.js";
import { renderGrid, renderProgram } from "../src/grid.js";
import { ManipulationDraft } from "../src/model.js";

const TRACE: TraceResponse = {
  steps: [
    { step: 0, loc: 2, vars: { x: [9, 5, 4], max: null, res: null } },
    { step: 1, loc: 8, vars: { x: [9, 5, 4], max: 5, res: null } },
    { step: 2, loc: "exit", vars: { x: [9, 5, 4], max: 5, res: 1 } },
  ],
  terminated: true,
};

const CALLBACKS = {
  onSelectStep: vi.fn(),
  onEditCell: vi.fn(),
  onToggleWildcard: vi.fn(),
};

function grid(selected: number | null, draft: ManipulationDraft | null) {
  const host = document.createElement("div");
  renderGrid(host, TRACE, new Set(["x"]), selected, draft, CALLBACKS);
  return host;
}

describe("renderGrid", () => {
  beforeEach(() => {
    document.body.textContent = "";
  });

  it("mirrors the trace payload cell for cell", () => {
    const host = grid(null, null);
    const rows = host.querySelectorAll("tbody tr");
    // line row + one row per variable
    expect(rows.length).toBe(1 + 3);
    const headers = [...host.querySelectorAll("thead th")].map(
      (th) => th.textContent,
    );
    expect(headers).toEqual(["step", "0", "1", "2"]);
    const maxRow = [...rows].find(
      (r) => r.querySelector("th")?.textContent === "max",
    )!;
    const cells = [...maxRow.querySelectorAll("td")].map(
      (td) => td.textContent,
    );
    expect(cells).toEqual(["—", "5", "5"]);
  });

  it("renders the undefined value as an em dash", () => {
    const host = grid(null, null);
    expect(host.querySelectorAll("td.undefined").length).toBeGreaterThan(0);
  });

  it("makes only non-input cells editable at the selected step", () => {
    const draft = new ManipulationDraft(1, new Set(["x"]));
    const host = grid(1, draft);
    const editable = [...host.querySelectorAll("td.editable")].map(
      (td) => (td as HTMLElement).dataset.variable,
    );
    expect(editable.sort()).toEqual(["max", "res"]);
    // the input variable x has no editor anywhere
    const xInputs = host.querySelectorAll(
      'td[data-variable="x"] input',
    );
    expect(xInputs.length).toBe(0);
  });

  it("reports step selection clicks", () => {
    const host = grid(null, null);
    (host.querySelector('th[data-step="1"]') as HTMLElement).click();
    expect(CALLBACKS.onSelectStep).toHaveBeenCalledWith(1);
  });

  it("shows a truncation badge for fuel-limited traces", () => {
    const host = document.createElement("div");
    renderGrid(host, { ...TRACE, terminated: false }, new Set(), null, null,
               CALLBACKS);
    expect(host.querySelector(".truncated-badge")).not.toBeNull();
  });
});

describe("renderProgram", () => {
  it("highlights the current line", () => {
    const host = document.createElement("div");
    renderProgram(host, "int f() {\n    return 1;\n}", 2);
    const lines = host.querySelectorAll(".program-line");
    expect(lines.length).toBe(3);
    expect(lines[1].classList.contains("current-line")).toBe(true);
  });
});

describe("renderProposal", () => {
  const RESULT: RepairResultDoc = {
    status: "repaired",
    patch: [
      {
        line: 5,
        before: "for(int i = 1; i < N-1; i++) {",
        after: "for(int i = 0; i < N-1; i++) {",
      },
    ],
    syntactic: 1,
    semantic: 3,
    cost: 4,
    satisfying_index: 6,
    stats: {},
  };

  it("shows the diff and the cost chips from the payload", () => {
    const host = document.createElement("div");
    renderProposal(host, RESULT);
    const chips = [...host.querySelectorAll(".chip")].map(
      (c) => c.textContent,
    );
    expect(chips).toEqual(["syntactic 1", "semantic 3", "total 4"]);
    expect(host.querySelector(".patch-before")?.textContent).toBe(
      "- for(int i = 1; i < N-1; i++) {",
    );
    expect(host.querySelector(".patch-after")?.textContent).toBe(
      "+ for(int i = 0; i < N-1; i++) {",
    );
    expect(host.querySelector(".satisfying-step")?.textContent).toContain(
      "step 6",
    );
  });

  it("renders the no-repair state", () => {
    const host = document.createElement("div");
    renderProposal(host, {
      status: "no_repair",
      reason: "space exhausted",
      patch: [],
      syntactic: null,
      semantic: null,
      cost: null,
      satisfying_index: null,
      stats: {},
    });
    expect(host.querySelector(".no-repair")?.textContent).toContain(
      "No more repairs",
    );
  });
});
