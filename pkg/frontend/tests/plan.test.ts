import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { describe, expect, it } from "vitest";

import { LETTER_OVERLAYS } from "../src/overlays.js";
import { parseUploadedPolyline } from "../src/overlays.js";
import { buildPlanDocument, serializePlan } from "../src/plan.js";
import type { ScenarioDocument } from "../src/protocol.js";

const here = dirname(fileURLToPath(import.meta.url));
const SCENARIO_DIR = join(here, "..", "..", "src", "chainform", "scenarios");

function loadScenario(name: string): ScenarioDocument {
  return JSON.parse(readFileSync(join(SCENARIO_DIR, `${name}.json`), "utf-8"));
}

describe("plan export", () => {
  it("produces a schedule-replaced scenario document", () => {
    const base = loadScenario("baseline");
    const doc = buildPlanDocument(base, [
      { chain: 0, point_id: 28, waypoints: [[150, 11]], step_um: 1 },
      { chain: 0, point_id: 28, waypoints: [[150, 12]], step_um: 1 },
    ]);
    expect(doc.version).toBe(1);
    expect(doc.initial_geometry).toEqual(base.initial_geometry);
    expect(doc.material).toEqual(base.material);
    expect(doc.solver).toEqual(base.solver);
    expect(doc.schedule.settle_between).toBe(true);
    expect(doc.schedule.moves).toHaveLength(2);
    expect(doc.schedule.moves[1]).toEqual({
      chain: 0,
      point_id: 28,
      waypoints: [[150, 12]],
      step_um: 1,
    });
  });

  it("embeds the target overlay into the outputs section", () => {
    const base = loadScenario("baseline");
    const doc = buildPlanDocument(
      base,
      [{ chain: 0, point_id: 28, waypoints: [[150, 11]], step_um: 1 }],
      { targetPolyline: LETTER_OVERLAYS["P"]! },
    );
    expect(doc.outputs["target_polyline"]).toEqual(LETTER_OVERLAYS["P"]);
  });

  it("refuses to export an empty plan", () => {
    const base = loadScenario("baseline");
    expect(() => buildPlanDocument(base, [])).toThrow(/empty/);
  });

  it("serializes to JSON with a trailing newline", () => {
    const base = loadScenario("baseline");
    const doc = buildPlanDocument(base, [
      { chain: 0, point_id: 28, waypoints: [[150, 11]], step_um: 1 },
    ]);
    const text = serializePlan(doc);
    expect(text.endsWith("\n")).toBe(true);
    expect(JSON.parse(text).name).toBe("baseline-recorded");
  });
});

describe("letter overlays", () => {
  it.each(["p", "k", "u"] as const)(
    "overlay %s equals the bundled scenario target polyline",
    (letter) => {
      const scenario = loadScenario(`letter-${letter}`);
      const overlay = LETTER_OVERLAYS[letter.toUpperCase()]!;
      expect(scenario.outputs["target_polyline"]).toEqual(overlay);
    },
  );
});

describe("overlay upload parsing", () => {
  it("accepts a valid polyline", () => {
    expect(parseUploadedPolyline("[[0, 0], [10, 5.5]]")).toEqual([
      [0, 0],
      [10, 5.5],
    ]);
  });

  it.each(["not json", "[[0,0]]", "[[0,0],[1]]", '[[0,0],[1,"a"]]'])(
    "rejects malformed input %s",
    (text) => {
      expect(() => parseUploadedPolyline(text)).toThrow();
    },
  );
});
