import { ApiClient } from "./api.js";
import { SchemaSessionApp } from "./app.js";

// ?service=http://host:port points the client at a service on another
// origin; the default is same-origin paths.
const root = document.getElementById("app");
if (root) {
  const base = new URLSearchParams(window.location.search).get("service") ?? "";
  new SchemaSessionApp({ client: new ApiClient(base) }).mount(root);
}
