// Session client plus the view state the UI renders from. The view holds
// only server-supplied state: no game rules live on this side.

import type {
  Frame,
  SessionConfigBody,
  SessionInput,
  Snapshot,
  StreamMessage,
} from "./protocol.js";

export interface SocketLike {
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((err?: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;
export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ClientOptions {
  fetchImpl?: FetchLike;
  socketFactory?: SocketFactory;
  now?: () => number;
  schedule?: (fn: () => void, ms: number) => void;
}

const BACKOFF_BASE_MS = 250;
const BACKOFF_CAP_MS = 8000;
export const STALE_STREAM_MS = 1000;
const FACE_MIN_INTERVAL_MS = 1000 / 15;

export class SessionClient {
  private fetchImpl: FetchLike;
  private socketFactory: SocketFactory;
  private now: () => number;
  private schedule: (fn: () => void, ms: number) => void;
  private consecutiveFailures = 0;
  onError: ((message: string) => void) | null = null;
  private lastFacePostMs = -Infinity;

  constructor(public baseUrl: string, opts: ClientOptions = {}) {
    this.fetchImpl = opts.fetchImpl ?? ((url, init) => fetch(url, init));
    this.socketFactory =
      opts.socketFactory ?? ((url) => new WebSocket(url) as unknown as SocketLike);
    this.now = opts.now ?? (() => Date.now());
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  }

  async createSession(config: SessionConfigBody = {}): Promise<string> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
    if (!response.ok) {
      const body = await response.json().catch(() => ({}));
      throw new Error(`session create failed: ${(body as { error?: string }).error ?? response.status}`);
    }
    return ((await response.json()) as { session_id: string }).session_id;
  }

  /** One POST per call; failures surface a toast and back off exponentially
   * (doubling, capped) instead of retry-storming. */
  async postInput(sessionId: string, input: SessionInput): Promise<boolean> {
    if (input.type === "face_position") {
      const nowMs = this.now();
      if (nowMs - this.lastFacePostMs < FACE_MIN_INTERVAL_MS) {
        return false; // face updates are throttled to <= 15/s
      }
      this.lastFacePostMs = nowMs;
    }
    try {
      const response = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/input`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(input),
      });
      if (!response.ok) throw new Error(`status ${response.status}`);
      this.consecutiveFailures = 0;
      return true;
    } catch (err) {
      this.consecutiveFailures += 1;
      const delay = Math.min(BACKOFF_BASE_MS * 2 ** (this.consecutiveFailures - 1), BACKOFF_CAP_MS);
      this.onError?.(`input failed (${String(err)}); retrying in ${Math.round(delay)} ms`);
      return await new Promise((resolve) =>
        this.schedule(() => {
          void this.retryOnce(sessionId, input).then(resolve);
        }, delay),
      );
    }
  }

  private async retryOnce(sessionId: string, input: SessionInput): Promise<boolean> {
    try {
      const response = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/input`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(input),
      });
      if (!response.ok) throw new Error(`status ${response.status}`);
      this.consecutiveFailures = 0;
      return true;
    } catch {
      this.onError?.("input dropped after retry");
      return false;
    }
  }

  get backoffFailures(): number {
    return this.consecutiveFailures;
  }

  connectFrames(sessionId: string, view: ClientView): SocketLike {
    const wsBase = this.baseUrl.replace(/^http/, "ws");
    const socket = this.socketFactory(`${wsBase}/sessions/${sessionId}/frames`);
    socket.onmessage = (event) => {
      try {
        const message = JSON.parse(String(event.data)) as StreamMessage;
        view.applyMessage(message, this.now());
      } catch {
        // malformed frame: skip it, keep the connection
      }
    };
    socket.onclose = () => view.markClosed();
    socket.onerror = () => view.markClosed();
    return socket;
  }
}

export type ConnectionState = "connecting" | "live" | "reconnecting" | "closed";

export class ClientView {
  connection: ConnectionState = "connecting";
  snapshot: Snapshot | null = null;
  frame: Frame | null = null;
  highlights: Set<number> = new Set();
  framesProcessed = 0;
  lastFrameAtMs = -Infinity;
  listeners: ((view: ClientView) => void)[] = [];

  applyMessage(message: StreamMessage, nowMs: number): void {
    if (message.type === "snapshot") {
      this.snapshot = message;
      this.connection = "live";
      this.lastFrameAtMs = nowMs;
    } else if (message.type === "frame") {
      this.frame = message;
      this.framesProcessed += 1;
      this.connection = "live";
      this.lastFrameAtMs = nowMs;
      this.highlights = new Set(message.highlight === null ? [] : [message.highlight]);
    }
    for (const fn of this.listeners) fn(this);
  }

  /** Stream gaps longer than a second surface a reconnecting indicator. */
  checkStaleness(nowMs: number): void {
    if (this.connection === "live" && nowMs - this.lastFrameAtMs > STALE_STREAM_MS) {
      this.connection = "reconnecting";
      for (const fn of this.listeners) fn(this);
    }
  }

  markClosed(): void {
    this.connection = "closed";
    for (const fn of this.listeners) fn(this);
  }

  onChange(fn: (view: ClientView) => void): void {
    this.listeners.push(fn);
  }
}
