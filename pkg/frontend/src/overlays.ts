/**
 * Built-in target letter overlays.
 *
 * These polylines are identical to the target_polyline entries of the
 * bundled letter scenarios, so a studio score against an overlay equals
 * the shape error the batch runner reports for the same state.
 */

import type { Vec2 } from "./path.js";

export const LETTER_OVERLAYS: Record<string, Vec2[]> = {
  P: [
    [0, 0],
    [0, 190],
    [51, 163],
    [53, 102],
    [2, 70],
  ],
  K: [
    [90, 5],
    [0, 96],
    [90, 155],
  ],
  U: [
    [10, 40],
    [10, 0],
    [180, 0],
    [180, 40],
  ],
};

export function parseUploadedPolyline(text: string): Vec2[] {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    throw new Error("overlay upload is not valid JSON");
  }
  if (
    !Array.isArray(data) ||
    data.length < 2 ||
    !data.every(
      (p) =>
        Array.isArray(p) &&
        p.length === 2 &&
        p.every((c) => typeof c === "number" && Number.isFinite(c)),
    )
  ) {
    throw new Error("overlay must be a JSON list of at least two [x, y] pairs");
  }
  return (data as [number, number][]).map((p) => [p[0], p[1]]);
}
