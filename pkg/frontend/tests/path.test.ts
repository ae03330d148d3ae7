import { describe, expect, it } from "vitest";

import { nearestPointIndex, quantizePointerPath, thinTargets } from "../src/path.js";
import type { Vec2 } from "../src/path.js";

function hyp(a: Vec2, b: Vec2): number {
  return Math.hypot(b[0] - a[0], b[1] - a[1]);
}

describe("quantizePointerPath", () => {
  it("bounds every hop by the step and ends exactly on the release point", () => {
    const start: Vec2 = [150, 10];
    const samples: Vec2[] = [
      [150.4, 13.7],
      [151.2, 19.3],
      [149.8, 27.05],
    ];
    const targets = quantizePointerPath(start, samples, 1.0);
    let prev = start;
    for (const t of targets) {
      expect(hyp(prev, t)).toBeLessThanOrEqual(1.0 + 1e-9);
      prev = t;
    }
    expect(targets[targets.length - 1]).toEqual([149.8, 27.05]);
  });

  it("includes every pointer sample bit-exactly", () => {
    const samples: Vec2[] = [[3.3, -1.1], [7.7, 2.2]];
    const targets = quantizePointerPath([0, 0], samples, 0.5);
    for (const s of samples) {
      expect(targets).toContainEqual(s);
    }
  });

  it("quantizes an empty or stationary path to nothing", () => {
    expect(quantizePointerPath([1, 1], [], 1.0)).toEqual([]);
    expect(quantizePointerPath([1, 1], [[1, 1], [1, 1]], 1.0)).toEqual([]);
  });

  it("rejects a non-positive step", () => {
    expect(() => quantizePointerPath([0, 0], [[1, 0]], 0)).toThrow(/step/);
  });
});

describe("thinTargets", () => {
  it("keeps spacing at or above the minimum and always keeps the last", () => {
    const targets = quantizePointerPath([0, 0], [[10, 0]], 0.25);
    const thinned = thinTargets(targets, 1.0);
    let prev: Vec2 | null = null;
    for (const t of thinned.slice(0, -1)) {
      if (prev !== null) {
        expect(hyp(prev, t)).toBeGreaterThanOrEqual(1.0 - 1e-9);
      }
      prev = t;
    }
    expect(thinned[thinned.length - 1]).toEqual([10, 0]);
  });

  it("passes empty input through", () => {
    expect(thinTargets([], 1.0)).toEqual([]);
  });
});

describe("nearestPointIndex", () => {
  const points: Vec2[] = [[0, 0], [5, 0], [10, 0]];

  it("finds the nearest point", () => {
    expect(nearestPointIndex(points, [9.4, 0.2])).toBe(2);
  });

  it("breaks ties toward the lower index like the service pick", () => {
    expect(nearestPointIndex(points, [2.5, 0])).toBe(0);
  });
});
