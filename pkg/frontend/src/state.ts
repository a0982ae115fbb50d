/**
 * View state and its reducer.
 *
 * All interaction flows through `reduce`: it is a pure function from the
 * previous state and one action to the next state, so replaying the same
 * action sequence from `initialState()` always lands on the same state.
 * Nothing in here touches the DOM or the network.
 */

import type {
  FilterRequest,
  FilterResponse,
  PathwayInfo,
  TreeResponse,
} from "./types.js";

export interface BoundPair {
  min: number;
  max: number;
}

export interface ViewState {
  runs: PathwayInfo[] | null;
  selectedRun: string | null;
  /** slider positions, always inside the run's advertised ranges */
  bounds: Record<string, BoundPair>;
  /** carrier -> included in the filter */
  carriers: Record<string, boolean>;
  treeDepth: number;
  /** k-means cluster count for tree labels; null labels by carrier */
  treeClusters: number | null;
  /** ids of tree nodes whose children are hidden */
  collapsed: number[];
  /** unfiltered snapshot for the selected run, used as the density backdrop */
  baseline: FilterResponse | null;
  /** latest applied filtered snapshot */
  filtered: FilterResponse | null;
  /** sequence number of the filter response currently applied */
  filterSeq: number;
  tree: TreeResponse | null;
  treeError: string | null;
  treePending: boolean;
}

export type Action =
  | { type: "runs-loaded"; runs: PathwayInfo[] }
  | { type: "select-run"; id: string }
  | { type: "set-bound"; variable: string; side: "min" | "max"; value: number }
  | { type: "toggle-carrier"; carrier: string }
  | { type: "set-depth"; value: number }
  | { type: "set-clusters"; value: number | null }
  | { type: "baseline-received"; run: string; body: FilterResponse }
  | { type: "filter-received"; seq: number; body: FilterResponse }
  | { type: "tree-requested" }
  | { type: "tree-received"; body: TreeResponse }
  | { type: "tree-failed"; detail: string }
  | { type: "toggle-collapse"; nodeId: number };

export function initialState(): ViewState {
  return {
    runs: null,
    selectedRun: null,
    bounds: {},
    carriers: {},
    treeDepth: 3,
    treeClusters: null,
    collapsed: [],
    baseline: null,
    filtered: null,
    filterSeq: 0,
    tree: null,
    treeError: null,
    treePending: false,
  };
}

export function currentRun(state: ViewState): PathwayInfo | null {
  if (state.runs === null || state.selectedRun === null) return null;
  return state.runs.find((r) => r.id === state.selectedRun) ?? null;
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

function freshBounds(run: PathwayInfo): Record<string, BoundPair> {
  const bounds: Record<string, BoundPair> = {};
  for (const v of run.variables) {
    const [lo, hi] = run.ranges[v];
    bounds[v] = { min: lo, max: hi };
  }
  return bounds;
}

function freshCarriers(run: PathwayInfo): Record<string, boolean> {
  const carriers: Record<string, boolean> = {};
  for (const c of run.carrier_levels) carriers[c] = true;
  return carriers;
}

export function reduce(state: ViewState, action: Action): ViewState {
  switch (action.type) {
    case "runs-loaded":
      return { ...state, runs: action.runs };

    case "select-run": {
      const runs = state.runs ?? [];
      const run = runs.find((r) => r.id === action.id);
      if (run === undefined) return state;
      return {
        ...state,
        selectedRun: run.id,
        bounds: freshBounds(run),
        carriers: freshCarriers(run),
        collapsed: [],
        baseline: null,
        filtered: null,
        tree: null,
        treeError: null,
        treePending: false,
      };
    }

    case "set-bound": {
      const run = currentRun(state);
      const pair = state.bounds[action.variable];
      if (run === null || pair === undefined) return state;
      const [lo, hi] = run.ranges[action.variable];
      // sliders can never leave the advertised range, and the pair stays
      // ordered so every request passes the service's min<=max validation
      let value = clamp(action.value, lo, hi);
      let next: BoundPair;
      if (action.side === "min") {
        next = { min: value, max: Math.max(value, pair.max) };
      } else {
        next = { min: Math.min(pair.min, value), max: value };
      }
      return { ...state, bounds: { ...state.bounds, [action.variable]: next } };
    }

    case "toggle-carrier": {
      if (!(action.carrier in state.carriers)) return state;
      return {
        ...state,
        carriers: {
          ...state.carriers,
          [action.carrier]: !state.carriers[action.carrier],
        },
      };
    }

    case "set-depth":
      return { ...state, treeDepth: clamp(Math.round(action.value), 1, 8) };

    case "set-clusters":
      return {
        ...state,
        treeClusters:
          action.value === null ? null : clamp(Math.round(action.value), 2, 12),
      };

    case "baseline-received":
      if (action.run !== state.selectedRun) return state;
      // the unfiltered snapshot doubles as the first filtered view
      return {
        ...state,
        baseline: action.body,
        filtered: state.filtered ?? action.body,
      };

    case "filter-received":
      // drop responses that a later request has already overtaken
      if (action.seq <= state.filterSeq) return state;
      return { ...state, filtered: action.body, filterSeq: action.seq };

    case "tree-requested":
      return { ...state, treePending: true, treeError: null };

    case "tree-received":
      return {
        ...state,
        tree: action.body,
        treeError: null,
        treePending: false,
        collapsed: [],
      };

    case "tree-failed":
      return {
        ...state,
        tree: null,
        treeError: action.detail,
        treePending: false,
      };

    case "toggle-collapse": {
      const collapsed = state.collapsed.includes(action.nodeId)
        ? state.collapsed.filter((id) => id !== action.nodeId)
        : [...state.collapsed, action.nodeId];
      return { ...state, collapsed };
    }
  }
}

/** True when the slider pair is tighter than the advertised range. */
function tightened(pair: BoundPair, range: [number, number]): boolean {
  return pair.min > range[0] || pair.max < range[1];
}

/**
 * Assemble the /filter request for the current state.
 *
 * Untouched sliders and fully-enabled carriers are omitted, so the default
 * state issues a genuinely unconstrained request.
 */
export function filterRequest(state: ViewState): FilterRequest | null {
  const run = currentRun(state);
  if (run === null) return null;
  const request: FilterRequest = { run: run.id };

  const bounds: FilterRequest["bounds"] = {};
  let any = false;
  for (const v of run.variables) {
    const pair = state.bounds[v];
    if (pair === undefined || !tightened(pair, run.ranges[v])) continue;
    bounds[v] = { min: pair.min, max: pair.max };
    any = true;
  }
  if (any) request.bounds = bounds;

  const enabled = run.carrier_levels.filter((c) => state.carriers[c]);
  if (enabled.length < run.carrier_levels.length) request.carriers = enabled;

  return request;
}

/** The /tree request: the current filter plus the tree controls. */
export function treeRequest(state: ViewState): FilterRequest | null {
  const request = filterRequest(state);
  if (request === null) return null;
  const tree: FilterRequest["tree"] = { max_depth: state.treeDepth };
  if (state.treeClusters !== null) tree.kmeans_k = state.treeClusters;
  return { ...request, tree };
}
