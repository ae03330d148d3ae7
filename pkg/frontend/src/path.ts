/**
 * Pointer-path quantization.
 *
 * Raw pointer samples are resampled into targets spaced at most one
 * scenario step apart along the pointer polyline, ending exactly on the
 * release position. Interactive drags therefore issue the same kind of
 * bounded-step target sequence a scripted plan produces, and the server
 * expands each one through the single shared solver path.
 */

export type Vec2 = [number, number];

function dist(a: Vec2, b: Vec2): number {
  return Math.hypot(b[0] - a[0], b[1] - a[1]);
}

/**
 * Quantize a pointer path to step-sized targets.
 *
 * Every returned target is at most `step` from its predecessor (and the
 * first at most `step` from `start`); the final sample is included
 * bit-exactly; zero-length paths quantize to nothing. Consecutive
 * duplicate samples are skipped.
 */
export function quantizePointerPath(start: Vec2, samples: Vec2[], step: number): Vec2[] {
  if (!(step > 0)) {
    throw new Error(`step must be positive, got ${step}`);
  }
  const out: Vec2[] = [];
  let cur: Vec2 = [start[0], start[1]];
  for (const raw of samples) {
    const target: Vec2 = [raw[0], raw[1]];
    const leg = dist(cur, target);
    if (leg === 0) {
      continue;
    }
    const n = Math.max(1, Math.ceil(leg / step));
    for (let k = 1; k < n; k += 1) {
      const t = k / n;
      out.push([cur[0] + (target[0] - cur[0]) * t, cur[1] + (target[1] - cur[1]) * t]);
    }
    out.push(target);
    cur = target;
  }
  return out;
}

/**
 * Thin a quantized target sequence for interactive sending: keep every
 * target at least `minSpacing` along the path from the previously kept
 * one, always keeping the last. Used to avoid flooding the service with
 * sub-step pointer jitter while still ending exactly at the release
 * position.
 */
export function thinTargets(targets: Vec2[], minSpacing: number): Vec2[] {
  if (targets.length === 0) {
    return [];
  }
  const out: Vec2[] = [];
  let last: Vec2 | null = null;
  for (const t of targets) {
    if (last === null || dist(last, t) >= minSpacing) {
      out.push(t);
      last = t;
    }
  }
  const tail = targets[targets.length - 1]!;
  const kept = out[out.length - 1]!;
  if (kept[0] !== tail[0] || kept[1] !== tail[1]) {
    out.push(tail);
  }
  return out;
}

/** Index of the point nearest to pos; ties break to the lower index. */
export function nearestPointIndex(points: Vec2[], pos: Vec2): number {
  let best = 0;
  let bestD = Infinity;
  points.forEach((p, i) => {
    const d = dist(p, pos);
    if (d < bestD) {
      bestD = d;
      best = i;
    }
  });
  return best;
}
