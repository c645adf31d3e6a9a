// Thin typed client for the chat service. The fetch implementation is
// injectable so tests can script the server.

import type { MessageReply, MetricsSnapshot, SessionDescriptor } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class RequestFailed extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function parseOrThrow<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = `HTTP ${res.status}`;
    try {
      const body = (await res.json()) as { message?: string };
      if (body && typeof body.message === "string") detail = body.message;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new RequestFailed(res.status, detail);
  }
  return (await res.json()) as T;
}

export class FiguraApi {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  async createSession(): Promise<SessionDescriptor> {
    const res = await this.fetchFn(`${this.base}/session`, { method: "POST" });
    return parseOrThrow<SessionDescriptor>(res);
  }

  async postMessage(sessionId: string, text: string): Promise<MessageReply> {
    const res = await this.fetchFn(`${this.base}/session/${sessionId}/message`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
    return parseOrThrow<MessageReply>(res);
  }

  async getMetrics(): Promise<MetricsSnapshot> {
    const res = await this.fetchFn(`${this.base}/metrics`);
    return parseOrThrow<MetricsSnapshot>(res);
  }
}
