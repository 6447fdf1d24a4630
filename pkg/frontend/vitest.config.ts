import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // the loopback file boots a real engine server; everything else is fast
    testTimeout: 20000,
    hookTimeout: 120000,
  },
});
