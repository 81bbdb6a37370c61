import { ApiClient } from "./api.ts";
import { mountApp } from "./app.ts";
import "./style.css";

const root = document.getElementById("app");
if (root) {
  mountApp(root, new ApiClient(""));
}
