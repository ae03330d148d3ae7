/** Browser bootstrap for the shaping studio. */

import { drawStudio, fitViewport, screenToWorld } from "./canvas.js";
import { LETTER_OVERLAYS, parseUploadedPolyline } from "./overlays.js";
import { buildPlanDocument, planFilename, serializePlan } from "./plan.js";
import { SessionClient } from "./protocol.js";
import { StudioController } from "./studio.js";
import type { ToolMode } from "./state.js";

const SERVICE_URL =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8742";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

async function boot(): Promise<void> {
  const canvas = byId<HTMLCanvasElement>("studio-canvas");
  const ctx = canvas.getContext("2d")!;
  const client = new SessionClient(SERVICE_URL);
  const controller = new StudioController(client);
  const state = controller.state;

  const scenarioSelect = byId<HTMLSelectElement>("scenario-select");
  const overlaySelect = byId<HTMLSelectElement>("overlay-select");
  const modeSelect = byId<HTMLSelectElement>("mode-select");
  const statusEl = byId<HTMLDivElement>("status");
  const scoreEl = byId<HTMLDivElement>("score");
  const planEl = byId<HTMLDivElement>("plan-summary");
  const exportBtn = byId<HTMLButtonElement>("export-plan");
  const replayBtn = byId<HTMLButtonElement>("replay-plan");
  const undoBtn = byId<HTMLButtonElement>("undo");
  const clearBtn = byId<HTMLButtonElement>("clear-plan");
  const uploadInput = byId<HTMLInputElement>("overlay-upload");

  const { scenarios } = await client.listScenarios();
  for (const name of scenarios) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    scenarioSelect.appendChild(opt);
  }
  scenarioSelect.value = scenarios.includes("baseline") ? "baseline" : scenarios[0]!;

  let viewportDirty = true;
  let viewport = fitViewport([[0, 0]], canvas.width, canvas.height);

  function render(): void {
    if (viewportDirty && state.frame) {
      viewport = fitViewport(state.frame.points, canvas.width, canvas.height);
      viewportDirty = false;
    }
    drawStudio(ctx, state, viewport, canvas.width, canvas.height);
    statusEl.textContent = state.sessionId
      ? `${state.scenarioName} · revision ${state.revision}` +
        (state.frame?.driven != null ? ` · driving point ${state.frame.driven}` : "")
      : "disconnected";
    scoreEl.textContent = state.score
      ? `rms ${state.score.rms_um.toFixed(3)} um · hausdorff ${state.score.hausdorff_um.toFixed(3)} um`
      : state.overlay
        ? "scoring..."
        : "no target overlay";
    planEl.textContent = `${state.plan.length} recorded move(s)`;
    exportBtn.disabled = state.plan.length === 0;
    replayBtn.disabled = state.plan.length === 0;
  }
  state.subscribe(render);

  async function openScenario(name: string): Promise<void> {
    await controller.open(name);
    viewportDirty = true;
    render();
  }

  scenarioSelect.addEventListener("change", () => void openScenario(scenarioSelect.value));
  modeSelect.addEventListener("change", () => state.setMode(modeSelect.value as ToolMode));

  overlaySelect.addEventListener("change", () => {
    const name = overlaySelect.value;
    if (name === "none") {
      void controller.setOverlay(null, null);
    } else if (name in LETTER_OVERLAYS) {
      void controller.setOverlay(name, LETTER_OVERLAYS[name]!);
    }
    render();
  });

  uploadInput.addEventListener("change", async () => {
    const file = uploadInput.files?.[0];
    if (!file) return;
    try {
      const polyline = parseUploadedPolyline(await file.text());
      await controller.setOverlay(file.name, polyline);
    } catch (err) {
      statusEl.textContent = String(err instanceof Error ? err.message : err);
    }
  });

  exportBtn.addEventListener("click", () => {
    if (!state.scenarioDoc) return;
    const doc = buildPlanDocument(state.scenarioDoc, state.plan, {
      targetPolyline: state.overlay,
    });
    const blob = new Blob([serializePlan(doc)], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = planFilename(doc);
    a.click();
    URL.revokeObjectURL(a.href);
  });

  replayBtn.addEventListener("click", () => void controller.replayPlan());
  undoBtn.addEventListener("click", () => void controller.undo());
  clearBtn.addEventListener("click", () => state.clearPlan());

  function pointerWorld(ev: PointerEvent): [number, number] {
    const rect = canvas.getBoundingClientRect();
    return screenToWorld(
      viewport,
      [ev.clientX - rect.left, ev.clientY - rect.top],
      canvas.height,
    );
  }

  canvas.addEventListener("pointerdown", (ev) => {
    if (controller.beginDrag(pointerWorld(ev))) {
      canvas.setPointerCapture(ev.pointerId);
    }
  });
  canvas.addEventListener("pointermove", (ev) => controller.moveDrag(pointerWorld(ev)));
  canvas.addEventListener("pointerup", () => void controller.endDrag());

  await openScenario(scenarioSelect.value);
}

boot().catch((err) => {
  const statusEl = document.getElementById("status");
  if (statusEl) statusEl.textContent = `failed to start: ${err}`;
  console.error(err);
});
