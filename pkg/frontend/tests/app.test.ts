/**
 * End-to-end behaviour against a mocked service: the canonical interaction
 * script (load a run, pin battery to zero, request a tree), zero-survivor
 * handling, replay determinism, response ordering, and the request budget
 * during slider drags.
 */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { Client } from "../src/api.js";
import { mount, type App } from "../src/dom.js";
import { fmtFraction } from "../src/render.js";
import type { FilterRequest, FilterResponse } from "../src/types.js";
import {
  BASELINE,
  defaultRouter,
  FILTERED,
  mockFetch,
  RUN,
  TREE1_RAW,
  type RecordedCall,
} from "./fixtures.js";

async function flush(): Promise<void> {
  for (let i = 0; i < 4; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

function fire(root: HTMLElement, selector: string, type: string, value?: string): void {
  const el = root.querySelector<HTMLInputElement>(selector);
  if (el === null) throw new Error(`no element matches ${selector}`);
  if (value !== undefined) el.value = value;
  el.dispatchEvent(new Event(type, { bubbles: true }));
}

interface Mounted {
  root: HTMLElement;
  app: App;
  calls: RecordedCall[];
}

function mountApp(router = defaultRouter, windowMs = 0): Mounted {
  const { fn, calls } = mockFetch(router);
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = mount(root, new Client("http://api.test", fn), windowMs);
  return { root, app, calls };
}

/** load the run, pin battery at zero, ask for a depth-1 tree */
async function runScript(m: Mounted): Promise<void> {
  await flush();
  fire(m.root, "select", "change", RUN.id);
  await flush();
  fire(m.root, 'input[data-variable="battery"][data-side="max"]', "input", "0");
  await flush();
  fire(m.root, 'input[data-action="set-depth"]', "input", "1");
  fire(m.root, 'button[data-action="fit-tree"]', "click");
  await flush();
}

describe("interaction script", () => {
  afterEach(() => {
    document.body.innerHTML = "";
  });

  it("renders the figures straight from the responses", async () => {
    const m = mountApp();
    await runScript(m);

    // surviving-fraction figure equals the /filter response value
    expect(m.root.querySelector(".fraction")!.textContent).toBe(
      fmtFraction(FILTERED.surviving_fraction),
    );
    expect(m.root.querySelector(".surviving")!.textContent).toContain("572 of 2000");

    // rendered thresholds byte-match the /tree response text
    const lexemes = new Map<number, string>();
    for (const match of TREE1_RAW.matchAll(/"id":(\d+)[^{}]*?"threshold":(-?[\d.eE+]+)/g)) {
      lexemes.set(Number(match[1]), match[2]);
    }
    const spans = m.root.querySelectorAll(".threshold");
    expect(spans.length).toBe(lexemes.size);
    for (const span of spans) {
      const id = Number(span.closest("[data-node]")!.getAttribute("data-node"));
      expect(span.textContent).toBe(lexemes.get(id));
    }
    expect(m.root.querySelectorAll(".tree-node")).toHaveLength(3);

    // the wire saw: the listing, the baseline, one filter, one tree fit
    expect(m.calls.map((c) => c.path)).toEqual([
      "/pathways",
      "/filter",
      "/filter",
      "/tree",
    ]);
    expect(m.calls[1].body).toEqual({ run: RUN.id });
    expect(m.calls[2].body).toEqual({
      run: RUN.id,
      bounds: { battery: { min: 0, max: 0 } },
    });
    expect(m.calls[3].body).toEqual({
      run: RUN.id,
      bounds: { battery: { min: 0, max: 0 } },
      tree: { max_depth: 1 },
    });
  });

  it("an impossible filter shows the empty state and a refused tree its reason", async () => {
    const m = mountApp();
    await flush();
    fire(m.root, "select", "change", RUN.id);
    await flush();
    fire(m.root, 'input[data-variable="wind"][data-side="max"]', "input", "0");
    await flush();
    expect(m.root.querySelector(".empty-state")!.textContent).toBe(
      "no near-optimal designs satisfy these constraints",
    );
    fire(m.root, 'button[data-action="fit-tree"]', "click");
    await flush();
    expect(m.root.querySelector(".tree-error")!.textContent).toBe(
      "no samples survive the filter",
    );
  });

  it("replaying the script reproduces the page byte for byte", async () => {
    const first = mountApp();
    await runScript(first);
    const snapshot = first.root.innerHTML;
    expect(snapshot.length).toBeGreaterThan(1000);

    const second = mountApp();
    await runScript(second);
    expect(second.root.innerHTML).toBe(snapshot);
  });
});

describe("response ordering", () => {
  afterEach(() => {
    document.body.innerHTML = "";
  });

  it("an overtaken response cannot roll the view back", async () => {
    // answers /filter by hand so completion order can be reversed
    const parked: Array<{ call: RecordedCall; resolve: (r: Response) => void }> = [];
    const fn = (async (input: RequestInfo | URL, init?: RequestInit) => {
      const path = String(input).replace(/^https?:\/\/[^/]+/, "");
      const call: RecordedCall = {
        method: init?.method ?? "GET",
        path,
        body: init?.body !== undefined ? JSON.parse(String(init.body)) : null,
      };
      const bounds = call.body?.bounds;
      if (path === "/filter" && bounds !== undefined) {
        return new Promise<Response>((resolve) => parked.push({ call, resolve }));
      }
      const routed = defaultRouter(call);
      return new Response(routed.raw, { status: routed.status });
    }) as typeof fetch;

    const root = document.createElement("div");
    document.body.appendChild(root);
    const app = mount(root, new Client("http://api.test", fn), 0);
    await flush();
    fire(root, "select", "change", RUN.id);
    await flush();

    fire(root, 'input[data-variable="battery"][data-side="max"]', "input", "60");
    fire(root, 'input[data-variable="battery"][data-side="max"]', "input", "20");
    await flush();
    expect(parked).toHaveLength(2);

    const later: FilterResponse = { ...FILTERED, n_surviving: 111 };
    const earlier: FilterResponse = { ...FILTERED, n_surviving: 999 };
    parked[1].resolve(new Response(JSON.stringify(later), { status: 200 }));
    await flush();
    parked[0].resolve(new Response(JSON.stringify(earlier), { status: 200 }));
    await flush();

    expect(app.state().filtered!.n_surviving).toBe(111);
    expect(root.querySelector(".surviving")!.textContent).toContain("111 of 2000");
  });
});

describe("request budget", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
    document.body.innerHTML = "";
  });

  it("a drag costs at most one filter call per 150 ms", async () => {
    const m = mountApp(defaultRouter, 150);
    await vi.advanceTimersByTimeAsync(0);
    fire(m.root, "select", "change", RUN.id);
    await vi.advanceTimersByTimeAsync(0);

    const constrained = (): FilterRequest[] =>
      m.calls
        .filter((c) => c.path === "/filter" && c.body?.bounds !== undefined)
        .map((c) => c.body!);

    for (const position of ["100", "80", "60", "40", "20"]) {
      fire(m.root, 'input[data-variable="battery"][data-side="max"]', "input", position);
      await vi.advanceTimersByTimeAsync(10);
    }
    expect(constrained()).toHaveLength(1);
    expect(constrained()[0].bounds!.battery.max).toBe(100);

    await vi.advanceTimersByTimeAsync(150);
    expect(constrained()).toHaveLength(2);
    // the trailing call carries the final slider position
    expect(constrained()[1].bounds!.battery.max).toBe(20);
  });
});
