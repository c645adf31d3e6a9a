// Session view-model and controller: optimistic message append, badge
// assignment, single in-flight request, retryable error banner.

import { FiguraApi } from "./api.js";
import type { Badge, ChatMessageView, MessageReply, MetricsSnapshot, ServerState } from "./types.js";

export interface ChatState {
  sessionId: string | null;
  messages: ChatMessageView[];
  pending: boolean;
  error: string | null;
  metrics: MetricsSnapshot | null;
  metricsStale: boolean;
}

/** Badge for a bot reply, given the session state before the reply. */
export function badgeFor(reply: MessageReply, stateBefore: ServerState): Badge | undefined {
  if (reply.triggered) {
    if (reply.form === "two_round") return "two_round_prompt";
    if (reply.form === "one_round") return "one_round";
    if (reply.form === "literal") return "literal";
  }
  if (stateBefore === "awaiting_follow_up") return "two_round_reveal";
  return undefined;
}

export class ChatClient {
  readonly state: ChatState = {
    sessionId: null,
    messages: [],
    pending: false,
    error: null,
    metrics: null,
    metricsStale: false,
  };

  private serverState: ServerState = "idle";
  private unsentText: string | null = null;
  private listeners: Array<() => void> = [];

  constructor(private readonly api: FiguraApi) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** True when the send control should be disabled. */
  canSend(text: string): boolean {
    return text.trim().length > 0 && !this.state.pending;
  }

  setError(message: string): void {
    this.state.error = message;
    this.notify();
  }

  async start(): Promise<void> {
    if (this.state.sessionId) return;
    const session = await this.api.createSession();
    this.state.sessionId = session.session_id;
    this.notify();
  }

  async send(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed || this.state.pending) return;
    this.state.messages.push({ speaker: "user", text: trimmed });
    await this.deliver(trimmed);
  }

  /** Re-send the message behind the error banner without duplicating it. */
  async retry(): Promise<void> {
    if (this.unsentText === null || this.state.pending) return;
    await this.deliver(this.unsentText);
  }

  private async deliver(text: string): Promise<void> {
    // reserve the in-flight slot before any await, or a second send could
    // slip past the pending check
    this.state.pending = true;
    this.state.error = null;
    this.notify();
    try {
      await this.start();
      const reply = await this.api.postMessage(this.state.sessionId as string, text);
      const badge = badgeFor(reply, this.serverState);
      this.serverState = reply.state;
      this.state.messages.push({ speaker: "bot", text: reply.text, badge });
      this.unsentText = null;
    } catch (err) {
      this.unsentText = text;
      this.state.error = err instanceof Error ? err.message : "request failed";
    } finally {
      this.state.pending = false;
      this.notify();
    }
  }

  async refreshMetrics(): Promise<void> {
    try {
      this.state.metrics = await this.api.getMetrics();
      this.state.metricsStale = false;
    } catch {
      this.state.metricsStale = true; // previous values stay on screen
    }
    this.notify();
  }
}
