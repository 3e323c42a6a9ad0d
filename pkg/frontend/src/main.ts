import { App } from "./app.js";
import { ApiClient } from "./client.js";

// The service origin: ?api=http://host:port beats a global override beats
// same-origin (for when the service itself hosts the static files).
function apiBase(): string {
  const fromQuery = new URLSearchParams(location.search).get("api");
  if (fromQuery) {
    return fromQuery.replace(/\/$/, "");
  }
  const override = (globalThis as { STORYRANK_API?: string }).STORYRANK_API;
  return override ? override.replace(/\/$/, "") : "";
}

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app root element");
}
const app = new App(root, new ApiClient(apiBase()));
void app.start();
