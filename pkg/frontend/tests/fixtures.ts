/**
 * Canned service responses for tests.
 *
 * Tree bodies are kept as raw JSON text in exactly the form the service
 * wires them (compact separators, integral floats with a trailing ".0"),
 * because the rendering tests compare DOM text against the raw bytes.
 */

import type {
  FilterRequest,
  FilterResponse,
  PathwayInfo,
  TreeResponse,
} from "../src/types.js";

export const RUN: PathwayInfo = {
  id: "hydrogen_shipping",
  pathway: "hydrogen_shipping",
  carrier: "hydrogen",
  epsilon: 0.1,
  n_samples: 2000,
  variables: ["battery", "pv", "wind"],
  units: ["MWh", "MW", "MW"],
  ranges: { battery: [0.0, 120.5], pv: [10.0, 4000.0], wind: [0.0, 3500.0] },
  optimum: { battery: 12.25, pv: 1500.5, wind: 2200.75 },
  lcoh: 90.68,
  carrier_levels: [],
};

export const COMBINED: PathwayInfo = {
  id: "combined",
  pathway: "combined",
  carrier: null,
  epsilon: 0.1,
  n_samples: 4000,
  variables: ["battery", "pv", "wind"],
  units: ["MWh", "MW", "MW"],
  ranges: { battery: [0.0, 120.5], pv: [10.0, 4000.0], wind: [0.0, 3500.0] },
  optimum: null,
  lcoh: null,
  carrier_levels: ["hydrogen", "methanol"],
};

export const BASELINE: FilterResponse = {
  run: "hydrogen_shipping",
  n_total: 2000,
  n_surviving: 2000,
  surviving_fraction: 1.0,
  histograms: {
    battery: { edges: [0, 24.1, 48.2, 72.3, 96.4, 120.5], counts: [400, 400, 400, 400, 400] },
    pv: { edges: [10, 808, 1606, 2404, 3202, 4000], counts: [100, 500, 800, 500, 100] },
    wind: { edges: [0, 700, 1400, 2100, 2800, 3500], counts: [200, 300, 600, 600, 300] },
  },
  carrier_counts: {},
  cost: { n_costed: 100, min: 90.68, max: 99.92, mean: 95.3 },
};

/** battery pinned at zero: 572 designs survive */
export const FILTERED: FilterResponse = {
  run: "hydrogen_shipping",
  n_total: 2000,
  n_surviving: 572,
  surviving_fraction: 0.286,
  histograms: {
    battery: { edges: [0, 24.1, 48.2, 72.3, 96.4, 120.5], counts: [572, 0, 0, 0, 0] },
    pv: { edges: [10, 808, 1606, 2404, 3202, 4000], counts: [20, 150, 250, 130, 22] },
    wind: { edges: [0, 700, 1400, 2100, 2800, 3500], counts: [40, 80, 180, 190, 82] },
  },
  carrier_counts: {},
  cost: { n_costed: 41, min: 91.02, max: 99.41, mean: 96.8 },
};

export const ZERO: FilterResponse = {
  run: "hydrogen_shipping",
  n_total: 2000,
  n_surviving: 0,
  surviving_fraction: 0.0,
  histograms: {
    battery: { edges: [0, 24.1, 48.2, 72.3, 96.4, 120.5], counts: [0, 0, 0, 0, 0] },
    pv: { edges: [10, 808, 1606, 2404, 3202, 4000], counts: [0, 0, 0, 0, 0] },
    wind: { edges: [0, 700, 1400, 2100, 2800, 3500], counts: [0, 0, 0, 0, 0] },
  },
  carrier_counts: {},
  cost: null,
};

/** depth-1 stump over the filtered subset, raw bytes as served */
export const TREE1_RAW =
  '{"schema":"nearopt-tree/1","feature_names":["battery","pv","wind"],' +
  '"n_classes":2,"class_names":["cluster_0","cluster_1"],"max_depth":1,' +
  '"min_leaf":6,"training_accuracy":0.8513986013986014,"reassign_disagreement":12,' +
  '"nodes":[' +
  '{"id":0,"feature":"pv","feature_index":1,"threshold":1312.625,"left":1,"right":2,' +
  '"histogram":[310,262],"n":572,"class":0,"class_name":"cluster_0"},' +
  '{"id":1,"feature":null,"feature_index":null,"threshold":null,"left":null,"right":null,' +
  '"histogram":[262,38],"n":300,"class":0,"class_name":"cluster_0"},' +
  '{"id":2,"feature":null,"feature_index":null,"threshold":null,"left":null,"right":null,' +
  '"histogram":[48,224],"n":272,"class":1,"class_name":"cluster_1"}]}';

/** complete depth-2 tree; the root threshold is integral on purpose */
export const TREE2_RAW =
  '{"schema":"nearopt-tree/1","feature_names":["battery","pv","wind"],' +
  '"n_classes":3,"class_names":["cluster_0","cluster_1","cluster_2"],"max_depth":2,' +
  '"min_leaf":6,"training_accuracy":0.7377622377622378,"reassign_disagreement":31,' +
  '"nodes":[' +
  '{"id":0,"feature":"battery","feature_index":0,"threshold":60.0,"left":1,"right":2,' +
  '"histogram":[200,200,172],"n":572,"class":0,"class_name":"cluster_0"},' +
  '{"id":1,"feature":"pv","feature_index":1,"threshold":1312.625,"left":3,"right":4,' +
  '"histogram":[180,80,40],"n":300,"class":0,"class_name":"cluster_0"},' +
  '{"id":2,"feature":"wind","feature_index":2,"threshold":1750.25,"left":5,"right":6,' +
  '"histogram":[20,120,132],"n":272,"class":2,"class_name":"cluster_2"},' +
  '{"id":3,"feature":null,"feature_index":null,"threshold":null,"left":null,"right":null,' +
  '"histogram":[150,20,10],"n":180,"class":0,"class_name":"cluster_0"},' +
  '{"id":4,"feature":null,"feature_index":null,"threshold":null,"left":null,"right":null,' +
  '"histogram":[30,60,30],"n":120,"class":1,"class_name":"cluster_1"},' +
  '{"id":5,"feature":null,"feature_index":null,"threshold":null,"left":null,"right":null,' +
  '"histogram":[5,100,20],"n":125,"class":1,"class_name":"cluster_1"},' +
  '{"id":6,"feature":null,"feature_index":null,"threshold":null,"left":null,"right":null,' +
  '"histogram":[15,20,112],"n":147,"class":2,"class_name":"cluster_2"}]}';

export const TREE1: TreeResponse = JSON.parse(TREE1_RAW);
export const TREE2: TreeResponse = JSON.parse(TREE2_RAW);

export interface RecordedCall {
  method: string;
  path: string;
  body: FilterRequest | null;
}

export interface Routed {
  status: number;
  raw: string;
}

export type Router = (call: RecordedCall) => Routed;

export function jsonOf(value: unknown): Routed {
  return { status: 200, raw: JSON.stringify(value) };
}

/**
 * Route the interaction-script requests: an unconstrained filter is the
 * baseline, a zero battery cap keeps the 572 battery-free designs, a zero
 * wind cap keeps nothing, and /tree answers by requested depth.
 */
export function defaultRouter(call: RecordedCall): Routed {
  if (call.path === "/pathways") return jsonOf([RUN, COMBINED]);
  const bounds = call.body?.bounds ?? {};
  if (call.path === "/filter") {
    if (bounds.wind !== undefined && bounds.wind.max === 0) return jsonOf(ZERO);
    if (bounds.battery !== undefined && bounds.battery.max === 0) {
      return jsonOf(FILTERED);
    }
    return jsonOf(BASELINE);
  }
  if (call.path === "/tree") {
    if (bounds.wind !== undefined && bounds.wind.max === 0) {
      return { status: 422, raw: '{"detail":"no samples survive the filter"}' };
    }
    const depth = call.body?.tree?.max_depth ?? 3;
    return { status: 200, raw: depth === 1 ? TREE1_RAW : TREE2_RAW };
  }
  return { status: 404, raw: '{"detail":"no such path"}' };
}

/** fetch stand-in that records every call and answers from the router */
export function mockFetch(router: Router = defaultRouter): {
  fn: typeof fetch;
  calls: RecordedCall[];
} {
  const calls: RecordedCall[] = [];
  const fn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const call: RecordedCall = {
      method: init?.method ?? "GET",
      path,
      body: init?.body !== undefined ? JSON.parse(String(init.body)) : null,
    };
    calls.push(call);
    const routed = router(call);
    return new Response(routed.raw, {
      status: routed.status,
      headers: { "content-type": "application/json" },
    });
  }) as typeof fetch;
  return { fn, calls };
}
