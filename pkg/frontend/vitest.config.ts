import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.{test,spec}.ts"],
    testTimeout: 120000,
    hookTimeout: 120000,
  },
});
