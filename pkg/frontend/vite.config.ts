import { defineConfig } from "vitest/config";

// In dev mode the Python service runs separately; proxy its API through.
export default defineConfig({
  server: {
    proxy: {
      "/api": "http://127.0.0.1:8008",
    },
  },
  build: {
    outDir: "dist",
  },
  test: {
    environment: "jsdom",
  },
});
