import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    proxy: {
      "/v1": "http://127.0.0.1:8000",
      "/healthz": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "happy-dom",
  },
});
