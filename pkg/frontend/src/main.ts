import { LexloopClient } from "./api.js";
import { initApp } from "./app.js";

declare global {
  interface Window {
    LEXLOOP_API_BASE?: string;
  }
}

// Same-origin by default (the service can mount this directory at /);
// ?api=http://host:port points the console at a service elsewhere.
const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? window.LEXLOOP_API_BASE ?? "";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
void initApp(root, new LexloopClient(base)).load();
