/**
 * Studio state store.
 *
 * Holds exactly what the operator sees: the latest service frame (the
 * UI never computes point positions itself), the selection, the target
 * overlay, the recorded plan, and the tool mode. Frame application is
 * idempotent and strictly ordered by revision; stale or duplicate
 * frames are dropped, so an out-of-order stream can never roll the
 * display backwards.
 */

import type { FramePayload, ScenarioDocument, StateMessage } from "./protocol.js";
import type { Vec2 } from "./path.js";

export type ToolMode = "drag" | "inspect" | "record";

export interface RecordedMove {
  chain: number;
  point_id: number; // local to the chain
  waypoints: Vec2[];
  step_um: number;
}

export interface ScoreDisplay {
  rms_um: number;
  hausdorff_um: number;
  revision: number;
}

export class StudioState {
  sessionId: string | null = null;
  scenarioName: string | null = null;
  scenarioDoc: ScenarioDocument | null = null;
  chainSizes: number[] = [];
  restLengthUm = 1;
  threshold = 0.05;

  revision = -1;
  frame: FramePayload | null = null;

  mode: ToolMode = "drag";
  selectedPoint: number | null = null; // global id
  overlayName: string | null = null;
  overlay: Vec2[] | null = null;
  score: ScoreDisplay | null = null;
  plan: RecordedMove[] = [];

  /** Number of frames dropped for arriving out of order (diagnostics). */
  droppedFrames = 0;

  private listeners = new Set<() => void>();

  subscribe(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  connect(state: StateMessage, doc: ScenarioDocument | null): void {
    this.sessionId = state.session_id;
    this.scenarioName = state.scenario;
    this.scenarioDoc = doc;
    this.chainSizes = state.chain_sizes;
    this.restLengthUm = state.rest_length_um;
    this.threshold = state.threshold;
    this.revision = state.revision;
    this.frame = state.frame;
    this.plan = [];
    this.score = null;
    this.droppedFrames = 0;
    this.notify();
  }

  /**
   * Apply a frame at the given revision. Returns true when applied,
   * false when dropped as stale. Equal revisions are idempotent drops.
   */
  applyFrame(revision: number, frame: FramePayload): boolean {
    if (revision <= this.revision) {
      this.droppedFrames += 1;
      return false;
    }
    this.revision = revision;
    this.frame = frame;
    this.notify();
    return true;
  }

  /** Force-resync after a disconnect; accepts whatever the service says. */
  resync(state: StateMessage): void {
    this.revision = state.revision;
    this.frame = state.frame;
    this.notify();
  }

  setMode(mode: ToolMode): void {
    this.mode = mode;
    this.notify();
  }

  setSelection(pointId: number | null): void {
    this.selectedPoint = pointId;
    this.notify();
  }

  setOverlay(name: string | null, polyline: Vec2[] | null): void {
    this.overlayName = name;
    this.overlay = polyline;
    this.score = null;
    this.notify();
  }

  setScore(score: ScoreDisplay): void {
    // Scores also arrive asynchronously; keep only the newest.
    if (this.score === null || score.revision >= this.score.revision) {
      this.score = score;
      this.notify();
    }
  }

  /**
   * Append one released drag segment to the recorded plan: every
   * quantized target the segment visited becomes a single-waypoint move,
   * so replaying the plan reissues the identical command sequence.
   */
  recordSegment(chain: number, localPointId: number, targets: Vec2[], stepUm: number): void {
    for (const target of targets) {
      this.plan.push({
        chain,
        point_id: localPointId,
        waypoints: [target],
        step_um: stepUm,
      });
    }
    this.notify();
  }

  clearPlan(): void {
    this.plan = [];
    this.notify();
  }
}
