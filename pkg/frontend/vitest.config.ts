import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // The integration suite boots the Python service and runs a CLI sweep.
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
