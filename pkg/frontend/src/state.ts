// View state for the chat: one active session, its message pairs, and the
// sampling parameter panel. Parameter setters clamp to the API's ranges.

import type { AskResponse } from "./types.ts";

export type Strategy = "engineered" | "zero_shot";

export type Params = {
  temperature: number;
  top_p: number;
  max_token: number;
  strategy: Strategy;
};

export type MessagePair = {
  question: string;
  response: AskResponse | null;
  error: string | null;
};

export const PARAM_LIMITS = {
  temperature: { min: 0, max: 2 },
  top_p: { min: 0.01, max: 1 },
  max_token: { min: 1, max: 4095 },
} as const;

function clamp(value: number, min: number, max: number): number {
  if (Number.isNaN(value)) return min;
  return Math.min(Math.max(value, min), max);
}

export class ChatState {
  sessionId: string | null = null;
  traceId: string | null = null;
  messages: MessagePair[] = [];
  busy = false;
  params: Params = {
    temperature: 0,
    top_p: 1,
    max_token: 350,
    strategy: "engineered",
  };

  setTemperature(value: number) {
    this.params.temperature = clamp(
      value,
      PARAM_LIMITS.temperature.min,
      PARAM_LIMITS.temperature.max,
    );
  }

  setTopP(value: number) {
    this.params.top_p = clamp(value, PARAM_LIMITS.top_p.min, PARAM_LIMITS.top_p.max);
  }

  setMaxToken(value: number) {
    this.params.max_token = Math.round(
      clamp(value, PARAM_LIMITS.max_token.min, PARAM_LIMITS.max_token.max),
    );
  }

  setStrategy(value: Strategy) {
    this.params.strategy = value;
  }
}
