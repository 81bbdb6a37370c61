// Mirrors of the server's request/response schemas.

export type PromptMessage = { role: string; text: string };
export type PromptStage = { stage: number; messages: PromptMessage[] };

export type UsageInfo = { prompt_tokens: number; completion_tokens: number };

export type GradingInfo = { grades: number[]; rationales: string[] };

export type CompletionOverrides = {
  n?: number;
  max_token?: number;
  temperature?: number;
  top_p?: number;
  model?: string;
};

export type AskRequest = {
  question: string;
  trace_id: string;
  form?: "open" | "closed";
  options?: string[];
  params?: CompletionOverrides;
  strategy?: "engineered" | "zero_shot";
};

export type AskResponse = {
  answers: string[];
  question_type: "A" | "B";
  timesteps_used: number[];
  defaulted: boolean;
  prompts: PromptStage[];
  usage: UsageInfo;
  grading: GradingInfo | null;
};

export type TraceSummary = {
  trace_id: string;
  timesteps: number;
  description: string;
  uncertain_timesteps: number[];
};

export type EnvStateView = {
  arrival_rate: number;
  servers: number;
  dimmer: number;
  response_time: number;
  utilization: number;
  timestep: number;
};

export type TimestepRecordView = {
  timestep: number;
  state: EnvStateView;
  chosen_action: string;
  q_table: Record<string, Record<string, number>>;
  reward: Record<string, unknown>;
  dominance: Record<string, Record<string, number>>;
  uncertainty_score: number;
  uncertain: boolean;
};
