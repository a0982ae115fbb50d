import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiError, Client, FilterScheduler } from "../src/api.js";
import type { FilterRequest } from "../src/types.js";
import { BASELINE, mockFetch, RUN, TREE1_RAW } from "./fixtures.js";

describe("client", () => {
  it("lists pathways with a GET", async () => {
    const { fn, calls } = mockFetch();
    const client = new Client("http://api.test", fn);
    const runs = await client.getPathways();
    expect(runs.map((r) => r.id)).toEqual(["hydrogen_shipping", "combined"]);
    expect(calls).toEqual([{ method: "GET", path: "/pathways", body: null }]);
  });

  it("posts the filter request as JSON and parses the response", async () => {
    const { fn, calls } = mockFetch();
    const client = new Client("http://api.test", fn);
    const request: FilterRequest = { run: "hydrogen_shipping" };
    const body = await client.postFilter(request);
    expect(body).toEqual(BASELINE);
    expect(calls[0].method).toBe("POST");
    expect(calls[0].body).toEqual(request);
  });

  it("tree responses round-trip the raw bytes", async () => {
    const { fn } = mockFetch();
    const client = new Client("http://api.test", fn);
    const tree = await client.postTree({ run: "hydrogen_shipping", tree: { max_depth: 1 } });
    expect(tree).toEqual(JSON.parse(TREE1_RAW));
  });

  it("error responses surface the service's detail text", async () => {
    const { fn } = mockFetch(() => ({
      status: 400,
      raw: '{"detail":"unknown variable \'flux\'"}',
    }));
    const client = new Client("http://api.test", fn);
    const err = await client.postFilter({ run: "x" }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.detail).toBe("unknown variable 'flux'");
  });

  it("structured validation details are readable too", async () => {
    const { fn } = mockFetch(() => ({
      status: 422,
      raw: '{"detail":[{"loc":["body","bounds"],"msg":"min must not exceed max"}]}',
    }));
    const client = new Client("http://api.test", fn);
    const err = await client.postFilter({ run: "x" }).catch((e) => e);
    expect(err.status).toBe(422);
    expect(err.detail).toContain("min must not exceed max");
  });
});

describe("filter scheduler", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  function drag(scheduler: FilterScheduler, values: number[], stepMs: number): void {
    for (const value of values) {
      scheduler.schedule({ run: "r", bounds: { battery: { min: 0, max: value } } });
      vi.advanceTimersByTime(stepMs);
    }
  }

  it("a burst collapses to the leading call plus one trailing call", () => {
    const sent: Array<{ request: FilterRequest; seq: number }> = [];
    const scheduler = new FilterScheduler((request, seq) => sent.push({ request, seq }), 150);
    drag(scheduler, [100, 80, 60, 40, 20], 10);
    expect(sent).toHaveLength(1);
    expect(sent[0].request.bounds!.battery.max).toBe(100);
    vi.advanceTimersByTime(150);
    expect(sent).toHaveLength(2);
    // the trailing call carries the latest slider position
    expect(sent[1].request.bounds!.battery.max).toBe(20);
    expect(sent.map((s) => s.seq)).toEqual([1, 2]);
  });

  it("never exceeds one call per window during a long drag", () => {
    const sent: number[] = [];
    const scheduler = new FilterScheduler(() => sent.push(Date.now()), 150);
    const start = Date.now();
    // 3 seconds of continuous dragging at 60 events per second
    drag(scheduler, Array.from({ length: 180 }, (_, i) => i), 1000 / 60);
    vi.advanceTimersByTime(200);
    for (let i = 1; i < sent.length; i++) {
      expect(sent[i] - sent[i - 1]).toBeGreaterThanOrEqual(150);
    }
    const windows = Math.ceil((Date.now() - start) / 150);
    expect(sent.length).toBeLessThanOrEqual(windows + 1);
    expect(sent.length).toBeGreaterThan(10);
  });

  it("well-spaced changes go out immediately", () => {
    const sent: FilterRequest[] = [];
    const scheduler = new FilterScheduler((request) => sent.push(request), 150);
    drag(scheduler, [1, 2, 3], 200);
    expect(sent).toHaveLength(3);
  });

  it("sequence numbers increase with every forwarded request", () => {
    const seqs: number[] = [];
    const scheduler = new FilterScheduler((_request, seq) => seqs.push(seq), 150);
    drag(scheduler, [1, 2, 3, 4], 200);
    expect(seqs).toEqual([1, 2, 3, 4]);
    expect(scheduler.lastSeq()).toBe(4);
  });
});
