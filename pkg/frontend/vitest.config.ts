import { defineConfig } from "vitest/config";

// Unit/snapshot tests only; the live-service run lives in vitest.e2e.config.ts.
export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
  },
});
