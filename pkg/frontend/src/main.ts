import { ApiClient } from "./api.js";
import { Editor } from "./editor.js";

const params = new URLSearchParams(window.location.search);
const hitId = params.get("hit");
const workerId = params.get("worker") ?? "anonymous";
const apiBase = params.get("api") ?? "";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

if (!hitId) {
  root.textContent = "Pass ?hit=<hit_id>&worker=<worker_id> in the URL.";
} else {
  const editor = new Editor(root, new ApiClient(apiBase), workerId);
  editor.load(hitId).catch((error) => {
    root.textContent = `Failed to load ${hitId}: ${error}`;
  });
}
