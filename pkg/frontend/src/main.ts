import { Client } from "./api.js";
import { mount } from "./dom.js";

// single place the service address is configured: ?api=... wins, then a
// global set by the embedding page, then same-origin
function baseUrl(): string {
  const param = new URLSearchParams(window.location.search).get("api");
  if (param !== null) return param.replace(/\/$/, "");
  const injected = (window as { __API_BASE__?: string }).__API_BASE__;
  if (injected !== undefined) return injected.replace(/\/$/, "");
  return "";
}

const root = document.getElementById("app");
if (root !== null) {
  mount(root, new Client(baseUrl()));
}
