/**
 * Studio parity against the real session service.
 *
 * Spawns the Python service, replays the bundled P-plan through the
 * session protocol with a scripted client, and checks that the exported
 * CSV is byte-identical to the batch CLI's golden for the same scenario.
 * Also drives an interactive-style drag of the baseline end point
 * through the StudioController and asserts the live bend is monotone
 * with every displayed frame coming from service revisions.
 */

import { execFileSync, spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { dirname } from "node:path";

import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { LETTER_OVERLAYS } from "../src/overlays.js";
import { SessionClient, globalPointId } from "../src/protocol.js";
import type { ScenarioDocument, SocketLike } from "../src/protocol.js";
import { StudioController } from "../src/studio.js";

const here = dirname(fileURLToPath(import.meta.url));
const REPO_ROOT = join(here, "..", "..");

let service: ChildProcess | null = null;
let baseUrl = "";
let workDir = "";

const wsFactory = (url: string): SocketLike => {
  const socket = new WebSocket(url);
  const like: SocketLike = {
    onmessage: null,
    onclose: null,
    onerror: null,
    close: () => socket.close(),
  };
  socket.on("message", (data) => like.onmessage?.({ data: data.toString() }));
  socket.on("close", () => like.onclose?.());
  socket.on("error", (err) => like.onerror?.(err));
  return like;
};

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, "127.0.0.1", () => {
      const address = srv.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      const port = address.port;
      srv.close(() => resolve(port));
    });
  });
}

async function waitForService(url: string, timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const resp = await fetch(`${url}/v1/scenarios`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      throw new Error("service did not become ready");
    }
    await new Promise((r) => setTimeout(r, 200));
  }
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "studio-parity-"));
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  service = spawn("python3", ["-m", "chainform.cli", "serve", "--port", String(port)], {
    cwd: REPO_ROOT,
    stdio: "ignore",
  });
  await waitForService(baseUrl);
}, 60000);

afterAll(() => {
  service?.kill("SIGTERM");
  if (workDir) {
    rmSync(workDir, { recursive: true, force: true });
  }
});

describe("studio parity with the batch CLI", () => {
  it("replays the bundled P-plan to a byte-identical exported CSV", async () => {
    const outDir = join(workDir, "letter-p");
    execFileSync(
      "python3",
      ["-m", "chainform.cli", "run", "--scenario", "letter-p", "--out", outDir],
      { cwd: REPO_ROOT },
    );
    const goldenCsv = readFileSync(join(outDir, "trajectory.csv"), "utf-8");
    const goldenMetrics = JSON.parse(readFileSync(join(outDir, "metrics.json"), "utf-8"));

    const client = new SessionClient(baseUrl, wsFactory);
    const { scenario } = await client.getScenario("letter-p");
    const session = await client.createSession("letter-p");

    for (const move of scenario.schedule.moves) {
      const gid = globalPointId(session.chain_sizes, move.chain, move.point_id);
      for (const [x, y] of move.waypoints) {
        const result = await client.drag(session.session_id, gid, { x, y }, move.step_um);
        expect(result.quiescent).toBe(true);
      }
    }

    const exported = await client.exportCsv(session.session_id);
    expect(exported).toBe(goldenCsv);

    // The studio's P overlay scores exactly what the CLI metrics report.
    const score = await client.score(session.session_id, LETTER_OVERLAYS["P"]!);
    expect(score.rms_um).toBe(goldenMetrics.final.shape_error.rms_um);
    expect(score.hausdorff_um).toBe(goldenMetrics.final.shape_error.hausdorff_um);
  }, 120000);

  it("drags the baseline end point into a monotone live bend, frames from service only", async () => {
    const client = new SessionClient(baseUrl, wsFactory);
    const controller = new StudioController(client);
    const state = controller.state;
    await controller.open("baseline");

    const observed: { revision: number; drivenY: number; points: unknown }[] = [];
    state.subscribe(() => {
      if (state.frame) {
        observed.push({
          revision: state.revision,
          drivenY: state.frame.points[28]![1],
          points: state.frame.points,
        });
      }
    });

    expect(controller.beginDrag([150, 10])).toBe(true);
    controller.moveDrag([150, 60]);
    await controller.endDrag();
    controller.close();

    // The plan recorded the quantized segment for replay/export.
    expect(state.plan.length).toBe(50);
    expect(state.plan[state.plan.length - 1]!.waypoints[0]).toEqual([150, 60]);

    // Monotone live bend: the rendered revision never goes backwards
    // (store notifications fire for non-frame changes too, so equal
    // revisions may repeat), the driven point only ever rises, and the
    // drag lands exactly on its target.
    expect(observed.length).toBeGreaterThan(1);
    const distinct = new Set(observed.map((o) => o.revision));
    expect(distinct.size).toBeGreaterThan(10);
    for (let i = 1; i < observed.length; i += 1) {
      expect(observed[i]!.revision).toBeGreaterThanOrEqual(observed[i - 1]!.revision);
      expect(observed[i]!.drivenY + 1e-12).toBeGreaterThanOrEqual(observed[i - 1]!.drivenY);
    }
    expect(state.frame!.points[28]).toEqual([150, 60]);

    // No client-side physics: the displayed frame must equal the
    // service's own record of the current state.
    const serverState = await client.getState(state.sessionId!);
    expect(state.frame).toEqual(serverState.frame);
    expect(state.revision).toBe(serverState.revision);
  }, 120000);
});
