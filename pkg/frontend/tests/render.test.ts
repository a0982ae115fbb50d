import { describe, expect, it } from "vitest";

import {
  EMPTY_STATE_MESSAGE,
  fmtFloat,
  fmtFraction,
  renderApp,
} from "../src/render.js";
import { initialState, reduce, type Action, type ViewState } from "../src/state.js";
import {
  BASELINE,
  COMBINED,
  FILTERED,
  RUN,
  TREE1,
  TREE2,
  TREE2_RAW,
  ZERO,
} from "./fixtures.js";

function play(actions: Action[]): ViewState {
  return actions.reduce(reduce, initialState());
}

function baseActions(): Action[] {
  return [
    { type: "runs-loaded", runs: [RUN, COMBINED] },
    { type: "select-run", id: RUN.id },
    { type: "baseline-received", run: RUN.id, body: BASELINE },
  ];
}

function mountHtml(state: ViewState): HTMLElement {
  const root = document.createElement("div");
  root.innerHTML = renderApp(state);
  return root;
}

describe("float formatting", () => {
  it("matches the service's JSON text", () => {
    expect(fmtFloat(0.1)).toBe("0.1");
    expect(fmtFloat(1312.625)).toBe("1312.625");
    expect(fmtFloat(2294)).toBe("2294.0");
    expect(fmtFloat(0)).toBe("0.0");
    expect(fmtFloat(-0)).toBe("-0.0");
    expect(fmtFloat(-17.5)).toBe("-17.5");
  });

  it("renders fractions as two-decimal percentages", () => {
    expect(fmtFraction(0.286)).toBe("28.60%");
    expect(fmtFraction(1)).toBe("100.00%");
    expect(fmtFraction(0)).toBe("0.00%");
  });
});

describe("summary and densities", () => {
  it("shows the surviving counts and fraction verbatim", () => {
    const root = mountHtml(
      play([...baseActions(), { type: "filter-received", seq: 1, body: FILTERED }]),
    );
    const summary = root.querySelector(".surviving")!;
    expect(summary.textContent).toContain("572 of 2000");
    expect(root.querySelector(".fraction")!.textContent).toBe(
      fmtFraction(FILTERED.surviving_fraction),
    );
    expect(root.querySelector(".cost")!.textContent).toContain("41 verified designs");
  });

  it("pooled runs list the surviving designs per carrier", () => {
    const body = {
      ...FILTERED,
      run: "combined",
      carrier_counts: { hydrogen: 411, methanol: 161 },
    };
    const root = mountHtml(
      play([
        { type: "runs-loaded", runs: [RUN, COMBINED] },
        { type: "select-run", id: "combined" },
        { type: "baseline-received", run: "combined", body: BASELINE },
        { type: "filter-received", seq: 1, body },
      ]),
    );
    const shares = root.querySelectorAll(".carrier-share");
    expect([...shares].map((s) => s.textContent)).toEqual([
      "hydrogen 411",
      "methanol 161",
    ]);
  });

  it("the unfiltered overlay coincides with the backdrop", () => {
    const root = mountHtml(play(baseActions()));
    const bins = root.querySelectorAll(".bin");
    expect(bins.length).toBe(15);
    for (const bin of bins) {
      const backdrop = bin.querySelector<HTMLElement>(".bar.backdrop")!;
      const overlay = bin.querySelector<HTMLElement>(".bar.overlay")!;
      expect(overlay.style.height).toBe(backdrop.style.height);
    }
  });

  it("a filtered view draws the overlay inside the backdrop", () => {
    const root = mountHtml(
      play([...baseActions(), { type: "filter-received", seq: 1, body: FILTERED }]),
    );
    const battery = root.querySelector('.density[data-variable="battery"]')!;
    const overlays = battery.querySelectorAll<HTMLElement>(".bar.overlay");
    // all 572 survivors sit in the first bin, which tops the backdrop peak
    expect(parseFloat(overlays[0].style.height)).toBeCloseTo((572 / 400) * 100, 6);
    for (let i = 1; i < overlays.length; i++) {
      expect(overlays[i].style.height).toBe("0.00%");
    }
  });

  it("zero survivors render the documented empty state", () => {
    const root = mountHtml(
      play([...baseActions(), { type: "filter-received", seq: 1, body: ZERO }]),
    );
    expect(root.querySelector(".empty-state")!.textContent).toBe(EMPTY_STATE_MESSAGE);
    for (const overlay of root.querySelectorAll<HTMLElement>(".bar.overlay")) {
      expect(overlay.style.height).toBe("0.00%");
    }
  });

  it("the cost-optimal design is marked at its coordinate", () => {
    const root = mountHtml(play(baseActions()));
    const battery = root.querySelector('.density[data-variable="battery"]')!;
    const marker = battery.querySelector<HTMLElement>(".optimum")!;
    expect(parseFloat(marker.style.left)).toBeCloseTo((12.25 / 120.5) * 100, 2);
    expect(marker.getAttribute("title")).toBe("cost optimum: 12.25 MWh");
  });

  it("runs without an optimum draw no marker", () => {
    const root = mountHtml(
      play([
        { type: "runs-loaded", runs: [RUN, COMBINED] },
        { type: "select-run", id: "combined" },
        { type: "baseline-received", run: "combined", body: BASELINE },
      ]),
    );
    expect(root.querySelectorAll(".optimum")).toHaveLength(0);
    // the pooled run exposes its carrier toggles instead
    expect(root.querySelectorAll('[data-action="toggle-carrier"]')).toHaveLength(2);
  });
});

describe("tree rendering", () => {
  it("a depth-1 tree renders exactly three nodes", () => {
    const root = mountHtml(
      play([...baseActions(), { type: "tree-received", body: TREE1 }]),
    );
    const nodes = root.querySelectorAll(".tree-node");
    expect(nodes).toHaveLength(3);
    expect(root.querySelectorAll(".tree-node.internal")).toHaveLength(1);
    expect(root.querySelectorAll(".tree-node.leaf")).toHaveLength(2);
  });

  it("thresholds byte-match the raw response text", () => {
    const root = mountHtml(
      play([...baseActions(), { type: "tree-received", body: TREE2 }]),
    );
    // threshold lexeme per node id, straight from the wire bytes
    const lexemes = new Map<number, string>();
    for (const m of TREE2_RAW.matchAll(/"id":(\d+)[^{}]*?"threshold":(-?[\d.eE+]+)/g)) {
      lexemes.set(Number(m[1]), m[2]);
    }
    expect(lexemes.size).toBe(3);
    const rendered = root.querySelectorAll(".threshold");
    expect(rendered).toHaveLength(3);
    for (const span of rendered) {
      const id = Number(span.closest("[data-node]")!.getAttribute("data-node"));
      expect(span.textContent).toBe(lexemes.get(id));
    }
  });

  it("every node reports its feature, share, and class distribution", () => {
    const root = mountHtml(
      play([...baseActions(), { type: "tree-received", body: TREE2 }]),
    );
    const node = root.querySelector('[data-node="1"]')!;
    expect(node.querySelector(".split")!.textContent).toContain("pv");
    expect(node.querySelector(".share")!.textContent).toContain("n=300");
    expect(node.querySelector(".share")!.textContent).toContain("52.4%");
    expect(node.querySelector(".dist")!.textContent).toBe("[180, 80, 40]");
    const leaf = root.querySelector('[data-node="5"]')!;
    expect(leaf.classList.contains("leaf-class-1")).toBe(true);
    expect(leaf.querySelector(".class-name")!.textContent).toBe("cluster_1");
  });

  it("sample shares sum to one at every depth level", () => {
    const root = mountHtml(
      play([...baseActions(), { type: "tree-received", body: TREE2 }]),
    );
    const byDepth = new Map<string, number>();
    for (const node of root.querySelectorAll(".tree-node")) {
      const depth = node.getAttribute("data-depth")!;
      const share = parseFloat(node.querySelector(".share")!.getAttribute("data-share")!);
      byDepth.set(depth, (byDepth.get(depth) ?? 0) + share);
    }
    expect([...byDepth.keys()].sort()).toEqual(["0", "1", "2"]);
    for (const total of byDepth.values()) {
      expect(total).toBeCloseTo(1.0, 12);
    }
  });

  it("collapsing an internal node hides its subtree", () => {
    const actions: Action[] = [...baseActions(), { type: "tree-received", body: TREE2 }];
    const expanded = mountHtml(play(actions));
    expect(expanded.querySelectorAll(".tree-node")).toHaveLength(7);
    const collapsed = mountHtml(
      play([...actions, { type: "toggle-collapse", nodeId: 1 }]),
    );
    expect(collapsed.querySelectorAll(".tree-node")).toHaveLength(5);
    expect(collapsed.querySelector('[data-node="3"]')).toBeNull();
    expect(collapsed.querySelector('[data-node="4"]')).toBeNull();
    const toggle = collapsed.querySelector('button[data-node="1"]')!;
    expect(toggle.textContent).toBe("[+]");
  });

  it("a refused fit shows the service's explanation inline", () => {
    const root = mountHtml(
      play([...baseActions(), { type: "tree-failed", detail: "no samples survive the filter" }]),
    );
    expect(root.querySelector(".tree-error")!.textContent).toBe(
      "no samples survive the filter",
    );
    expect(root.querySelectorAll(".tree-node")).toHaveLength(0);
  });
});

describe("controls", () => {
  it("sliders carry the advertised range and the current position", () => {
    const state = play([
      ...baseActions(),
      { type: "set-bound", variable: "battery", side: "max", value: 60 },
    ]);
    const root = mountHtml(state);
    const slider = root.querySelector<HTMLInputElement>(
      'input[data-variable="battery"][data-side="max"]',
    )!;
    expect(slider.getAttribute("min")).toBe("0");
    expect(slider.getAttribute("max")).toBe("120.5");
    expect(slider.getAttribute("value")).toBe("60");
    const label = root.querySelector('[data-variable="battery"] .bound-name')!;
    expect(label.textContent).toContain("battery");
    expect(label.textContent).toContain("[MWh]");
  });
});
