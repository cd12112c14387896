import { ApiClient } from "./api.js";
import { SessionStore } from "./store.js";
import { init } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const api = new ApiClient(window.fetch.bind(window));
  init(root, new SessionStore(api));
}
