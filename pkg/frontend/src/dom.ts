/**
 * Event wiring: binds DOM events to actions, actions to API calls, and
 * re-renders the page after every state change.
 *
 * The page content is rebuilt from `renderApp(state)` on each dispatch, so
 * the DOM is a pure function of the view state; all listeners live on the
 * container and survive the rebuild via event delegation.
 */

import { ApiError, Client, FilterScheduler } from "./api.js";
import { renderApp } from "./render.js";
import {
  filterRequest,
  initialState,
  reduce,
  treeRequest,
  type Action,
  type ViewState,
} from "./state.js";

export interface App {
  dispatch(action: Action): void;
  state(): ViewState;
}

export function mount(root: HTMLElement, client: Client, windowMs = 150): App {
  let state = initialState();
  let treeSeq = 0;

  const scheduler = new FilterScheduler((request, seq) => {
    client
      .postFilter(request)
      .then((body) => dispatch({ type: "filter-received", seq, body }))
      .catch((err) => console.error("filter request failed", err));
  }, windowMs);

  function render(): void {
    root.innerHTML = renderApp(state);
  }

  function fetchBaseline(run: string): void {
    client
      .postFilter({ run })
      .then((body) => dispatch({ type: "baseline-received", run, body }))
      .catch((err) => console.error("baseline request failed", err));
  }

  function fitTree(): void {
    const request = treeRequest(state);
    if (request === null) return;
    treeSeq += 1;
    const seq = treeSeq;
    dispatch({ type: "tree-requested" });
    client
      .postTree(request)
      .then((body) => {
        // a newer fit supersedes this one
        if (seq === treeSeq) dispatch({ type: "tree-received", body });
      })
      .catch((err) => {
        if (seq !== treeSeq) return;
        const detail =
          err instanceof ApiError ? err.detail : "tree request failed";
        dispatch({ type: "tree-failed", detail });
      });
  }

  function dispatch(action: Action): void {
    state = reduce(state, action);
    if (action.type === "select-run") {
      fetchBaseline(action.id);
    } else if (action.type === "set-bound" || action.type === "toggle-carrier") {
      const request = filterRequest(state);
      if (request !== null) scheduler.schedule(request);
    }
    render();
  }

  root.addEventListener("change", (event) => {
    const el = event.target as HTMLElement;
    const action = el.dataset.action;
    if (action === "select-run") {
      const id = (el as HTMLSelectElement).value;
      if (id !== "") dispatch({ type: "select-run", id });
    } else if (action === "toggle-carrier") {
      dispatch({ type: "toggle-carrier", carrier: el.dataset.carrier ?? "" });
    }
  });

  root.addEventListener("input", (event) => {
    const el = event.target as HTMLElement;
    const action = el.dataset.action;
    if (action === "set-bound") {
      const value = parseFloat((el as HTMLInputElement).value);
      if (Number.isNaN(value)) return;
      dispatch({
        type: "set-bound",
        variable: el.dataset.variable ?? "",
        side: el.dataset.side === "min" ? "min" : "max",
        value,
      });
    } else if (action === "set-depth") {
      const value = parseInt((el as HTMLInputElement).value, 10);
      if (Number.isNaN(value)) return;
      dispatch({ type: "set-depth", value });
    } else if (action === "set-clusters") {
      const raw = (el as HTMLInputElement).value;
      const value = parseInt(raw, 10);
      // clearing the field falls back to carrier labels
      dispatch({ type: "set-clusters", value: Number.isNaN(value) ? null : value });
    }
  });

  root.addEventListener("click", (event) => {
    const el = (event.target as HTMLElement).closest("[data-action]");
    if (el === null || !root.contains(el)) return;
    const action = (el as HTMLElement).dataset.action;
    if (action === "fit-tree") {
      fitTree();
    } else if (action === "toggle-collapse") {
      const nodeId = parseInt((el as HTMLElement).dataset.node ?? "", 10);
      if (!Number.isNaN(nodeId)) dispatch({ type: "toggle-collapse", nodeId });
    }
  });

  render();
  client
    .getPathways()
    .then((runs) => dispatch({ type: "runs-loaded", runs }))
    .catch((err) => {
      root.innerHTML = `<div class="load-error">could not reach the service</div>`;
      console.error("pathway listing failed", err);
    });

  return {
    dispatch,
    state: () => state,
  };
}
