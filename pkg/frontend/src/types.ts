// Wire types of the figura HTTP JSON API.

export interface SessionDescriptor {
  session_id: string;
  created_at: number;
}

export type ServerState = "idle" | "awaiting_follow_up";

export type ExpressionForm = "literal" | "one_round" | "two_round";

export interface MessageReply {
  text: string;
  triggered: boolean;
  form: ExpressionForm | null;
  state: ServerState;
}

export interface FormStats {
  delivered: number;
  followed_up: number;
  rate: number;
}

export interface MetricsSnapshot {
  forms: Record<string, FormStats>;
}

export interface ApiError {
  code: "bad_request" | "not_found" | "conflict" | "internal";
  message: string;
}

// Presentation types.

export type Badge = "literal" | "one_round" | "two_round_prompt" | "two_round_reveal";

export interface ChatMessageView {
  speaker: "user" | "bot";
  text: string;
  badge?: Badge;
}
