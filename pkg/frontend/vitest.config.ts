import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    globalSetup: ["tests/setup/launch.ts"],
    // the service child process needs a moment to boot
    testTimeout: 30_000,
    hookTimeout: 90_000,
  },
});
