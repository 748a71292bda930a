import { mount } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const baseUrl =
  new URLSearchParams(window.location.search).get("api") ?? "/v1";

mount(root, baseUrl).catch((error) => {
  root.textContent = `failed to start: ${String(error)}`;
});
