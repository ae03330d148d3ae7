/**
 * Typed client for the chainform session protocol (v1).
 *
 * Commands go over HTTP; live frames arrive on a one-way WebSocket
 * stream. The WebSocket constructor is injectable so the same client
 * runs in the browser (native WebSocket) and under node tests (ws).
 */

export interface FramePayload {
  frame: number;
  driven: number | null;
  points: [number, number][];
  elongations: (number | null)[];
}

export interface StateMessage {
  v: number;
  session_id: string;
  revision: number;
  scenario: string;
  chain_sizes: number[];
  rest_length_um: number;
  threshold: number;
  frame: FramePayload;
}

export interface StreamMessage {
  v: number;
  revision: number;
  frame: FramePayload;
}

export interface DragResult {
  v: number;
  revision: number;
  quiescent: boolean;
  frames: number;
  settle_sweeps: number | null;
  metrics: Record<string, unknown>;
  frame: FramePayload;
}

export interface ScoreResult {
  v: number;
  revision: number;
  rms_um: number;
  hausdorff_um: number;
}

export interface ScenarioDocument {
  version: number;
  name: string;
  comment?: string;
  initial_geometry: [number, number][][];
  material: Record<string, number>;
  solver: Record<string, number>;
  schedule: {
    settle_between: boolean;
    moves: {
      chain: number;
      point_id: number;
      waypoints: [number, number][];
      step_um: number;
    }[];
  };
  sweep?: { param: string; values: number[] };
  outputs: Record<string, unknown>;
}

export interface ProtocolError {
  v: number;
  error: string;
  message: string;
  field?: string;
}

export class ServiceError extends Error {
  readonly code: string;
  readonly field?: string;

  constructor(body: ProtocolError, status: number) {
    super(`${body.error} (${status}): ${body.message}`);
    this.code = body.error;
    this.field = body.field;
  }
}

/** Minimal WebSocket surface shared by browsers and the ws package. */
export interface SocketLike {
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((err: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  const body = (await resp.json()) as T | ProtocolError;
  if (!resp.ok) {
    throw new ServiceError(body as ProtocolError, resp.status);
  }
  return body as T;
}

export class SessionClient {
  readonly baseUrl: string;
  private readonly socketFactory: SocketFactory | null;

  constructor(baseUrl: string, socketFactory?: SocketFactory) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.socketFactory =
      socketFactory ??
      (typeof WebSocket !== "undefined"
        ? (url) => new WebSocket(url) as unknown as SocketLike
        : null);
  }

  listScenarios(): Promise<{ v: number; scenarios: string[] }> {
    return request(`${this.baseUrl}/v1/scenarios`);
  }

  getScenario(name: string): Promise<{ v: number; scenario: ScenarioDocument }> {
    return request(`${this.baseUrl}/v1/scenarios/${encodeURIComponent(name)}`);
  }

  createSession(scenario: string | ScenarioDocument): Promise<StateMessage> {
    return request(`${this.baseUrl}/v1/session`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ scenario }),
    });
  }

  getState(sessionId: string): Promise<StateMessage> {
    return request(`${this.baseUrl}/v1/session/${sessionId}/state`);
  }

  drag(
    sessionId: string,
    pointId: number,
    target: { x: number; y: number },
    stepUm: number,
  ): Promise<DragResult> {
    return request(`${this.baseUrl}/v1/session/${sessionId}/drag`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ point_id: pointId, target, step_um: stepUm }),
    });
  }

  step(sessionId: string): Promise<{ v: number; revision: number; frame: FramePayload }> {
    return request(`${this.baseUrl}/v1/session/${sessionId}/step`, { method: "POST" });
  }

  undo(sessionId: string): Promise<StateMessage> {
    return request(`${this.baseUrl}/v1/session/${sessionId}/undo`, { method: "POST" });
  }

  score(sessionId: string, targetPolyline: [number, number][]): Promise<ScoreResult> {
    return request(`${this.baseUrl}/v1/session/${sessionId}/score`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ target_polyline: targetPolyline }),
    });
  }

  async exportCsv(sessionId: string): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/v1/session/${sessionId}/export`);
    if (!resp.ok) {
      throw new ServiceError((await resp.json()) as ProtocolError, resp.status);
    }
    return resp.text();
  }

  /**
   * Subscribe to the one-way frame stream. Returns a close handle.
   * Messages are delivered in arrival order; revision filtering is the
   * consumer's job (StudioState drops stale ones).
   */
  stream(
    sessionId: string,
    onMessage: (msg: StreamMessage) => void,
    onClose?: () => void,
  ): () => void {
    if (this.socketFactory === null) {
      throw new Error("no WebSocket implementation available");
    }
    const wsUrl = this.baseUrl.replace(/^http/, "ws");
    const socket = this.socketFactory(`${wsUrl}/v1/session/${sessionId}/stream`);
    socket.onmessage = (event) => {
      onMessage(JSON.parse(String(event.data)) as StreamMessage);
    };
    socket.onclose = onClose ?? null;
    return () => socket.close();
  }
}

/** Global point id of (chain, local id) under concatenated numbering. */
export function globalPointId(chainSizes: number[], chain: number, local: number): number {
  let offset = 0;
  for (let i = 0; i < chain; i += 1) {
    offset += chainSizes[i] ?? 0;
  }
  return offset + local;
}

/** Split a concatenated point list into per-chain slices. */
export function splitChains(
  points: [number, number][],
  chainSizes: number[],
): [number, number][][] {
  const out: [number, number][][] = [];
  let start = 0;
  for (const n of chainSizes) {
    out.push(points.slice(start, start + n));
    start += n;
  }
  return out;
}
