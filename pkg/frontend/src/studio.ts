/**
 * Studio controller: wires pointer input, the session client, and the
 * state store together.
 *
 * Interaction contract:
 *  - pointerdown in drag/record mode selects the chain point nearest
 *    the cursor (lower index wins ties, mirroring the service's pick).
 *  - pointer movement is quantized to the scenario step and sent as a
 *    serialized sequence of drag commands; one command is in flight at
 *    a time, newer pointer positions supersede queued ones.
 *  - on release the visited targets are appended to the recorded plan.
 *  - every displayed coordinate comes from a service frame; the
 *    controller never moves points locally.
 */

import { SessionClient, globalPointId } from "./protocol.js";
import type { ScenarioDocument, StateMessage } from "./protocol.js";
import { nearestPointIndex, quantizePointerPath, thinTargets } from "./path.js";
import type { Vec2 } from "./path.js";
import { StudioState } from "./state.js";

const PICK_RADIUS_UM = 12;

export class StudioController {
  readonly state: StudioState;
  private readonly client: SessionClient;
  private closeStream: (() => void) | null = null;

  private dragging = false;
  private dragChain = 0;
  private dragLocal = 0;
  private dragSent: Vec2[] = [];
  private pending: Vec2[] = [];
  private inFlight = false;

  constructor(client: SessionClient, state?: StudioState) {
    this.client = client;
    this.state = state ?? new StudioState();
  }

  async open(scenario: string | ScenarioDocument): Promise<StateMessage> {
    this.closeStream?.();
    const session = await this.client.createSession(scenario);
    let doc: ScenarioDocument | null = null;
    if (typeof scenario === "string") {
      doc = (await this.client.getScenario(scenario)).scenario;
    } else {
      doc = scenario;
    }
    this.state.connect(session, doc);
    this.closeStream = this.client.stream(
      session.session_id,
      (msg) => this.state.applyFrame(msg.revision, msg.frame),
      () => void this.resync(),
    );
    return session;
  }

  close(): void {
    this.closeStream?.();
    this.closeStream = null;
  }

  private async resync(): Promise<void> {
    if (this.state.sessionId === null) return;
    this.dragging = false;
    this.pending = [];
    try {
      const state = await this.client.getState(this.state.sessionId);
      this.state.resync(state);
    } catch {
      // Session is gone; leave the last frame on screen.
    }
  }

  get stepUm(): number {
    const moves = this.state.scenarioDoc?.schedule.moves;
    const first = moves && moves.length > 0 ? moves[0] : undefined;
    return first ? first.step_um : 1.0;
  }

  /** Begin a drag near the given world position; false when nothing is close. */
  beginDrag(worldPos: Vec2): boolean {
    const frame = this.state.frame;
    if (!frame || this.state.sessionId === null || this.state.mode === "inspect") {
      return false;
    }
    const gid = nearestPointIndex(frame.points, worldPos);
    const picked = frame.points[gid]!;
    if (Math.hypot(picked[0] - worldPos[0], picked[1] - worldPos[1]) > PICK_RADIUS_UM) {
      return false;
    }
    let chain = 0;
    let local = gid;
    for (const size of this.state.chainSizes) {
      if (local < size) break;
      local -= size;
      chain += 1;
    }
    this.dragging = true;
    this.dragChain = chain;
    this.dragLocal = local;
    this.dragSent = [];
    this.pending = [];
    this.state.setSelection(gid);
    return true;
  }

  /** Feed one pointer sample while dragging. */
  moveDrag(worldPos: Vec2): void {
    if (!this.dragging) return;
    const frame = this.state.frame;
    if (!frame) return;
    const gid = globalPointId(this.state.chainSizes, this.dragChain, this.dragLocal);
    const current = frame.points[gid]!;
    const quantized = quantizePointerPath(current, [worldPos], this.stepUm);
    this.pending = thinTargets(quantized, this.stepUm);
    void this.pump();
  }

  /** Finish the drag; resolves once queued commands have drained. */
  async endDrag(): Promise<void> {
    if (!this.dragging) return;
    this.dragging = false;
    await this.pump();
    while (this.inFlight) {
      await new Promise((resolve) => setTimeout(resolve, 5));
    }
    if (this.dragSent.length > 0) {
      this.state.recordSegment(this.dragChain, this.dragLocal, this.dragSent, this.stepUm);
      this.dragSent = [];
      await this.refreshScore();
    }
  }

  private async pump(): Promise<void> {
    if (this.inFlight || this.state.sessionId === null) return;
    const next = this.pending.shift();
    if (next === undefined) return;
    this.inFlight = true;
    try {
      const gid = globalPointId(this.state.chainSizes, this.dragChain, this.dragLocal);
      const result = await this.client.drag(
        this.state.sessionId,
        gid,
        { x: next[0], y: next[1] },
        this.stepUm,
      );
      this.dragSent.push(next);
      // The response frame is authoritative too; apply through the same
      // revision-ordered gate as streamed frames.
      this.state.applyFrame(result.revision, result.frame);
    } catch {
      this.pending = [];
      this.dragging = false;
      await this.resync();
    } finally {
      this.inFlight = false;
    }
    if (this.pending.length > 0) {
      void this.pump();
    }
  }

  async refreshScore(): Promise<void> {
    const { overlay, sessionId } = this.state;
    if (!overlay || sessionId === null) return;
    const score = await this.client.score(
      sessionId,
      overlay.map((p) => [p[0], p[1]] as [number, number]),
    );
    this.state.setScore({
      rms_um: score.rms_um,
      hausdorff_um: score.hausdorff_um,
      revision: score.revision,
    });
  }

  async setOverlay(name: string | null, polyline: Vec2[] | null): Promise<void> {
    this.state.setOverlay(name, polyline);
    if (polyline) {
      await this.refreshScore();
    }
  }

  async undo(): Promise<void> {
    if (this.state.sessionId === null) return;
    const state = await this.client.undo(this.state.sessionId);
    this.state.resync(state);
    await this.refreshScore();
  }

  /** Replay the recorded plan from a fresh session of the same scenario. */
  async replayPlan(): Promise<void> {
    const doc = this.state.scenarioDoc;
    const plan = [...this.state.plan];
    if (!doc || plan.length === 0) return;
    await this.open(doc);
    for (const move of plan) {
      const gid = globalPointId(this.state.chainSizes, move.chain, move.point_id);
      for (const w of move.waypoints) {
        const result = await this.client.drag(
          this.state.sessionId!,
          gid,
          { x: w[0], y: w[1] },
          move.step_um,
        );
        this.state.applyFrame(result.revision, result.frame);
      }
    }
    this.state.plan = plan;
    await this.refreshScore();
  }
}
