/**
 * Recorded plan export.
 *
 * The exported document is a complete scenario file: the session's
 * originating scenario supplies geometry, material, and solver blocks,
 * while the schedule is replaced by the recorded moves. Running the
 * export through the batch CLI replays the session command-for-command.
 */

import type { ScenarioDocument } from "./protocol.js";
import type { RecordedMove } from "./state.js";
import type { Vec2 } from "./path.js";

export function buildPlanDocument(
  base: ScenarioDocument,
  plan: RecordedMove[],
  options?: { name?: string; targetPolyline?: Vec2[] | null },
): ScenarioDocument {
  if (plan.length === 0) {
    throw new Error("recorded plan is empty");
  }
  const outputs: Record<string, unknown> = { ...base.outputs };
  if (options?.targetPolyline) {
    outputs["target_polyline"] = options.targetPolyline.map((p) => [p[0], p[1]]);
  }
  return {
    version: base.version,
    name: options?.name ?? `${base.name}-recorded`,
    comment: `Recorded in the shaping studio from scenario '${base.name}'.`,
    initial_geometry: base.initial_geometry,
    material: { ...base.material },
    solver: { ...base.solver },
    schedule: {
      settle_between: true,
      moves: plan.map((m) => ({
        chain: m.chain,
        point_id: m.point_id,
        waypoints: m.waypoints.map((w) => [w[0], w[1]] as [number, number]),
        step_um: m.step_um,
      })),
    },
    outputs: outputs as ScenarioDocument["outputs"],
  };
}

export function planFilename(doc: ScenarioDocument): string {
  return `${doc.name}.json`;
}

export function serializePlan(doc: ScenarioDocument): string {
  return `${JSON.stringify(doc, null, 2)}\n`;
}
