// Metrics panel rows: per-form delivered / followed-up counts and a
// percentage, in a fixed display order.

import type { MetricsSnapshot } from "./types.js";

export interface MetricsRow {
  form: string;
  label: string;
  delivered: number;
  followedUp: number;
  percent: string;
}

const FORM_ORDER: Array<[string, string]> = [
  ["literal", "Literal"],
  ["one_round", "One-round"],
  ["two_round", "Two-round"],
];

export function metricsRows(snapshot: MetricsSnapshot | null): MetricsRow[] {
  return FORM_ORDER.map(([form, label]) => {
    const stats = snapshot?.forms[form] ?? { delivered: 0, followed_up: 0, rate: 0 };
    return {
      form,
      label,
      delivered: stats.delivered,
      followedUp: stats.followed_up,
      percent: `${Math.round(stats.rate * 100)}%`,
    };
  });
}
