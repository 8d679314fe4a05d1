/** Thin typed client for the control service.
 *
 * Transport is injectable: the browser passes window.fetch and an
 * EventSource-backed stream opener; tests pass scripted fakes. */

import type {
  Command,
  CommandAck,
  PolicyListing,
  SessionSummary,
  StreamMessage,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Opens a server-push stream; returns a handle that closes it. */
export type StreamOpener = (
  url: string,
  onMessage: (msg: StreamMessage) => void,
  onError: (err: unknown) => void,
) => { close(): void };

export class ControlServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike,
    private readonly streamOpener: StreamOpener,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const r = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!r.ok) {
      const body = await r.text();
      throw new Error(`${init?.method ?? "GET"} ${path} failed (${r.status}): ${body}`);
    }
    return (await r.json()) as T;
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request("/health");
  }

  createSession(body: Record<string, unknown>): Promise<SessionSummary & { session_id: string }> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  sessionInfo(sessionId: string): Promise<SessionSummary> {
    return this.request(`/sessions/${sessionId}`);
  }

  policies(sessionId: string): Promise<PolicyListing> {
    return this.request(`/sessions/${sessionId}/policies`);
  }

  sendCommand(sessionId: string, command: Command): Promise<CommandAck> {
    return this.request(`/sessions/${sessionId}/commands`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(command),
    });
  }

  /** Server-push stream: a snapshot first, then deltas. `since` skips the
   * events the caller already holds (reconnect support). */
  openStream(
    sessionId: string,
    since: number,
    onMessage: (msg: StreamMessage) => void,
    onError: (err: unknown) => void,
  ): { close(): void } {
    const url = `${this.baseUrl}/sessions/${sessionId}/stream?since=${since}&follow=true`;
    return this.streamOpener(url, onMessage, onError);
  }
}

/** Browser stream opener built on EventSource (SSE). */
export function eventSourceOpener(
  EventSourceImpl: typeof EventSource,
): StreamOpener {
  return (url, onMessage, onError) => {
    const source = new EventSourceImpl(url);
    source.onmessage = (ev) => onMessage(JSON.parse(ev.data) as StreamMessage);
    source.onerror = (err) => onError(err);
    return { close: () => source.close() };
  };
}
