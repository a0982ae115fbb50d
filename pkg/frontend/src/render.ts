/**
 * Pure renderers: view state in, HTML string out.
 *
 * Every function here is deterministic in its arguments, so replaying an
 * interaction script against recorded responses reproduces the page byte
 * for byte. All figures, names, and units come verbatim from the last API
 * responses held in the state; nothing is recomputed client-side.
 */

import { currentRun, type ViewState } from "./state.js";
import type {
  FilterResponse,
  PathwayInfo,
  TreeNodeOut,
  TreeResponse,
} from "./types.js";

export const EMPTY_STATE_MESSAGE =
  "no near-optimal designs satisfy these constraints";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Format a float exactly as the service's JSON text renders it.
 *
 * Both sides print the shortest round-trip decimal for a 64-bit float; the
 * only divergence is integral values, which the service writes with a
 * trailing ".0" and JavaScript without, so that case is patched here.
 */
export function fmtFloat(value: number): string {
  if (Object.is(value, -0)) return "-0.0";
  if (Number.isInteger(value) && Math.abs(value) < 1e15) {
    return value.toFixed(1);
  }
  return String(value);
}

/** Surviving fraction as a percentage with two decimals. */
export function fmtFraction(fraction: number): string {
  return (fraction * 100).toFixed(2) + "%";
}

function fmtShare(n: number, total: number): string {
  return ((n / total) * 100).toFixed(1) + "%";
}

/** display unit for a variable; units arrive aligned with the variable list */
function unitOf(run: PathwayInfo, variable: string): string {
  const i = run.variables.indexOf(variable);
  return i >= 0 ? (run.units[i] ?? "") : "";
}

function renderRunPicker(state: ViewState): string {
  const runs = state.runs ?? [];
  const options = runs
    .map((r) => {
      const selected = r.id === state.selectedRun ? " selected" : "";
      return `<option value="${escapeHtml(r.id)}"${selected}>${escapeHtml(r.id)}</option>`;
    })
    .join("");
  const placeholder =
    state.selectedRun === null ? `<option value="" selected>choose a run</option>` : "";
  return `<label class="run-picker">run
    <select data-action="select-run">${placeholder}${options}</select>
  </label>`;
}

function renderControls(state: ViewState): string {
  const run = currentRun(state);
  if (run === null) return "";
  const sliders = run.variables
    .map((v) => {
      const [lo, hi] = run.ranges[v];
      const pair = state.bounds[v];
      const unit = escapeHtml(unitOf(run, v));
      return `<div class="bound" data-variable="${escapeHtml(v)}">
        <span class="bound-name">${escapeHtml(v)} <span class="unit">[${unit}]</span></span>
        <input type="range" data-action="set-bound" data-variable="${escapeHtml(v)}" data-side="min"
               min="${lo}" max="${hi}" step="any" value="${pair.min}">
        <input type="range" data-action="set-bound" data-variable="${escapeHtml(v)}" data-side="max"
               min="${lo}" max="${hi}" step="any" value="${pair.max}">
        <span class="bound-values">${fmtFloat(pair.min)} to ${fmtFloat(pair.max)}</span>
      </div>`;
    })
    .join("\n");
  const carriers = run.carrier_levels
    .map((c) => {
      const checked = state.carriers[c] ? " checked" : "";
      return `<label class="carrier"><input type="checkbox" data-action="toggle-carrier"
        data-carrier="${escapeHtml(c)}"${checked}> ${escapeHtml(c)}</label>`;
    })
    .join("\n");
  return `<section class="controls">
    ${sliders}
    ${carriers.length > 0 ? `<div class="carriers">${carriers}</div>` : ""}
    <label class="depth">tree depth
      <input type="number" data-action="set-depth" min="1" max="8" value="${state.treeDepth}">
    </label>
    <label class="clusters">clusters
      <input type="number" data-action="set-clusters" min="2" max="12"
             placeholder="by carrier" value="${state.treeClusters ?? ""}">
    </label>
    <button data-action="fit-tree">fit tree</button>
  </section>`;
}

function renderSummary(filtered: FilterResponse): string {
  const cost =
    filtered.cost === null
      ? ""
      : `<span class="cost">cost of ${filtered.cost.n_costed} verified designs:
         ${fmtFloat(filtered.cost.min)} to ${fmtFloat(filtered.cost.max)},
         mean ${fmtFloat(filtered.cost.mean)}</span>`;
  const carriers = Object.entries(filtered.carrier_counts)
    .map(
      ([name, count]) =>
        `<span class="carrier-share">${escapeHtml(name)} ${count}</span>`,
    )
    .join(" ");
  return `<section class="summary">
    <span class="surviving">${filtered.n_surviving} of ${filtered.n_total} designs
      (<span class="fraction">${fmtFraction(filtered.surviving_fraction)}</span>)</span>
    ${carriers === "" ? "" : `<span class="carriers-surviving">${carriers}</span>`}
    ${cost}
  </section>`;
}

function renderDensity(
  variable: string,
  unit: string,
  backdrop: { edges: number[]; counts: number[] },
  overlay: { edges: number[]; counts: number[] } | null,
  optimum: number | null,
): string {
  const peak = Math.max(...backdrop.counts, 1);
  const bins = backdrop.counts
    .map((count, i) => {
      const over = overlay === null ? 0 : overlay.counts[i];
      return `<div class="bin">
        <div class="bar backdrop" style="height:${((count / peak) * 100).toFixed(2)}%"></div>
        <div class="bar overlay" style="height:${((over / peak) * 100).toFixed(2)}%"></div>
      </div>`;
    })
    .join("");
  const lo = backdrop.edges[0];
  const hi = backdrop.edges[backdrop.edges.length - 1];
  let marker = "";
  if (optimum !== null && hi > lo) {
    const pos = (((optimum - lo) / (hi - lo)) * 100).toFixed(2);
    marker = `<span class="optimum" style="left:${pos}%" title="cost optimum: ${fmtFloat(optimum)} ${escapeHtml(unit)}"></span>`;
  }
  return `<div class="density" data-variable="${escapeHtml(variable)}">
    <h3>${escapeHtml(variable)} <span class="unit">[${escapeHtml(unit)}]</span></h3>
    <div class="bars">${bins}${marker}</div>
  </div>`;
}

function renderDensities(state: ViewState): string {
  const run = currentRun(state);
  const baseline = state.baseline;
  if (run === null || baseline === null) return "";
  const filtered = state.filtered ?? baseline;
  const empty =
    filtered.n_surviving === 0
      ? `<div class="empty-state">${EMPTY_STATE_MESSAGE}</div>`
      : "";
  const panels = run.variables
    .map((v) =>
      renderDensity(
        v,
        unitOf(run, v),
        baseline.histograms[v],
        filtered.n_surviving === 0 ? null : filtered.histograms[v],
        run.optimum === null ? null : run.optimum[v],
      ),
    )
    .join("\n");
  return `<section class="densities">${empty}${panels}</section>`;
}

function renderTreeNode(
  tree: TreeResponse,
  node: TreeNodeOut,
  run: PathwayInfo,
  rootN: number,
  depth: number,
  collapsed: number[],
): string {
  const share = `<span class="share" data-share="${node.n / rootN}">n=${node.n}
    (${fmtShare(node.n, rootN)})</span>`;
  const dist = `<span class="dist">[${node.histogram.join(", ")}]</span>`;
  if (node.left === null || node.right === null || node.feature === null) {
    return `<div class="tree-node leaf leaf-class-${node.class}" data-node="${node.id}" data-depth="${depth}">
      <span class="class-name">${escapeHtml(node.class_name)}</span> ${share} ${dist}
    </div>`;
  }
  const isCollapsed = collapsed.includes(node.id);
  const unit = unitOf(run, node.feature);
  const header = `<span class="split">${escapeHtml(node.feature)} &le;
    <span class="threshold">${fmtFloat(node.threshold as number)}</span>
    <span class="unit">${escapeHtml(unit)}</span></span>`;
  const toggle = `<button class="tree-toggle" data-action="toggle-collapse"
    data-node="${node.id}">${isCollapsed ? "[+]" : "[-]"}</button>`;
  const children = isCollapsed
    ? ""
    : `<div class="children">
        ${renderTreeNode(tree, tree.nodes[node.left], run, rootN, depth + 1, collapsed)}
        ${renderTreeNode(tree, tree.nodes[node.right], run, rootN, depth + 1, collapsed)}
      </div>`;
  return `<div class="tree-node internal" data-node="${node.id}" data-depth="${depth}">
    ${toggle} ${header} ${share} ${dist}
    ${children}
  </div>`;
}

function renderTreePanel(state: ViewState): string {
  const run = currentRun(state);
  if (run === null) return "";
  if (state.treeError !== null) {
    return `<section class="tree"><div class="tree-error">${escapeHtml(state.treeError)}</div></section>`;
  }
  if (state.treePending) {
    return `<section class="tree"><div class="tree-pending">fitting tree</div></section>`;
  }
  const tree = state.tree;
  if (tree === null) return "";
  const root = tree.nodes[0];
  const legend = tree.class_names
    .map(
      (name, i) =>
        `<span class="legend-entry leaf-class-${i}">${escapeHtml(name)}</span>`,
    )
    .join(" ");
  return `<section class="tree">
    <div class="tree-meta">depth ${tree.max_depth}, training accuracy
      ${fmtFraction(tree.training_accuracy)}, ${legend}</div>
    ${renderTreeNode(tree, root, run, root.n, 0, state.collapsed)}
  </section>`;
}

export function renderApp(state: ViewState): string {
  if (state.runs === null) {
    return `<div class="loading">loading runs</div>`;
  }
  const parts = [renderRunPicker(state), renderControls(state)];
  if (state.filtered !== null) parts.push(renderSummary(state.filtered));
  parts.push(renderDensities(state));
  parts.push(renderTreePanel(state));
  return parts.filter((p) => p !== "").join("\n");
}
