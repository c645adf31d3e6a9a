import { FiguraApi } from "./api.js";
import { ChatClient } from "./chat.js";
import { findRefs, wire } from "./ui.js";

const METRICS_POLL_MS = 3000;

function baseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "";
}

function badgesEnabled(): boolean {
  const value = new URLSearchParams(window.location.search).get("badges");
  return !(value === "0" || value === "off" || value === "false");
}

async function boot(): Promise<void> {
  const api = new FiguraApi(baseUrl());
  const client = new ChatClient(api);
  const refs = findRefs(document);
  wire(client, refs, document, { showBadges: badgesEnabled() });

  try {
    await client.start();
  } catch (err) {
    client.setError(err instanceof Error ? err.message : "could not open a session");
  }

  // metrics polling runs independently and never blocks sending
  void client.refreshMetrics();
  window.setInterval(() => void client.refreshMetrics(), METRICS_POLL_MS);
}

document.addEventListener("DOMContentLoaded", () => void boot());
