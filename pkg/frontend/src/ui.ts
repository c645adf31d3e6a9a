// DOM rendering. The whole view re-renders from ChatState on every change;
// the message list and metrics panel are small enough that diffing would
// buy nothing.

import type { ChatClient } from "./chat.js";
import { metricsRows } from "./metrics.js";

const BADGE_LABELS: Record<string, string> = {
  literal: "literal",
  one_round: "one-round",
  two_round_prompt: "two-round prompt",
  two_round_reveal: "two-round reveal",
};

export interface UiRefs {
  messages: HTMLElement;
  input: HTMLInputElement;
  sendButton: HTMLButtonElement;
  errorBanner: HTMLElement;
  retryButton: HTMLButtonElement;
  metricsBody: HTMLElement;
  staleIndicator: HTMLElement;
  pendingIndicator: HTMLElement;
}

export function findRefs(root: Document): UiRefs {
  const byId = <T extends HTMLElement>(id: string): T => {
    const el = root.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
  };
  return {
    messages: byId("messages"),
    input: byId<HTMLInputElement>("chat-input"),
    sendButton: byId<HTMLButtonElement>("send-button"),
    errorBanner: byId("error-banner"),
    retryButton: byId<HTMLButtonElement>("retry-button"),
    metricsBody: byId("metrics-body"),
    staleIndicator: byId("metrics-stale"),
    pendingIndicator: byId("pending-indicator"),
  };
}

export interface RenderOptions {
  showBadges: boolean; // demo/debug affordance; hidden for real-user deployments
}

const DEFAULT_OPTIONS: RenderOptions = { showBadges: true };

export function render(
  client: ChatClient,
  refs: UiRefs,
  doc: Document,
  options: RenderOptions = DEFAULT_OPTIONS,
): void {
  const state = client.state;

  refs.messages.textContent = "";
  for (const message of state.messages) {
    const bubble = doc.createElement("div");
    bubble.className = `message ${message.speaker}`;
    const text = doc.createElement("span");
    text.className = "text";
    text.textContent = message.text;
    bubble.appendChild(text);
    if (message.badge && options.showBadges) {
      const badge = doc.createElement("span");
      badge.className = `badge badge-${message.badge}`;
      badge.textContent = BADGE_LABELS[message.badge] ?? message.badge;
      bubble.appendChild(badge);
    }
    refs.messages.appendChild(bubble);
  }

  refs.pendingIndicator.hidden = !state.pending;
  refs.errorBanner.hidden = state.error === null;
  if (state.error !== null) {
    refs.errorBanner.querySelector(".error-text")!.textContent = state.error;
  }
  refs.sendButton.disabled = !client.canSend(refs.input.value);

  refs.metricsBody.textContent = "";
  for (const row of metricsRows(state.metrics)) {
    const tr = doc.createElement("tr");
    for (const cell of [row.label, `${row.followedUp}/${row.delivered}`, row.percent]) {
      const td = doc.createElement("td");
      td.textContent = cell;
      tr.appendChild(td);
    }
    refs.metricsBody.appendChild(tr);
  }
  refs.staleIndicator.hidden = !state.metricsStale;
}

export function wire(
  client: ChatClient,
  refs: UiRefs,
  doc: Document,
  options: RenderOptions = DEFAULT_OPTIONS,
): void {
  const rerender = () => render(client, refs, doc, options);
  client.onChange(rerender);

  refs.input.addEventListener("input", rerender);
  refs.sendButton.addEventListener("click", () => {
    const text = refs.input.value;
    if (!client.canSend(text)) return;
    refs.input.value = "";
    void client.send(text);
  });
  refs.input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") refs.sendButton.click();
  });
  refs.retryButton.addEventListener("click", () => void client.retry());
  rerender();
}
