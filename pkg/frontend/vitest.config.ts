import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    globalSetup: "tests/helpers/global-setup.ts",
    testTimeout: 120_000,
    hookTimeout: 120_000,
    // The suite talks to one shared service process; keep files sequential
    // so constrained-run tests never race the fixture setup.
    fileParallelism: false,
  },
});
