/** Browser bootstrap: wire the app to the page and the real fetch. */

import { ChatApp } from "./app.js";
import { replaceChildren } from "./dom.js";
import { ChatClient } from "./protocol.js";

const DEFAULT_BASE = `${location.protocol}//${location.hostname}:8080`;

function baseUrl(): string {
  const params = new URLSearchParams(location.search);
  return params.get("server") ?? DEFAULT_BASE;
}

export function start(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const app = new ChatApp(new ChatClient(baseUrl()));
  app.onChange = () => replaceChildren(root, app.render(), document);
  app.onChange();
  void app.init();
}

start();
