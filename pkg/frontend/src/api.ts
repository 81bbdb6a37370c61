// Thin fetch client for the explanation service. The UI never computes
// explanation facts itself; everything rendered comes from these responses.

import type {
  AskRequest,
  AskResponse,
  TimestepRecordView,
  TraceSummary,
} from "./types.ts";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
    public body: Record<string, unknown>,
  ) {
    super(detail);
  }

  get retryAfterSeconds(): number | null {
    const value = this.body["retry_after_seconds"];
    return typeof value === "number" ? value : null;
  }
}

async function parseError(response: Response): Promise<never> {
  let body: Record<string, unknown> = {};
  try {
    body = await response.json();
  } catch {
    // non-JSON error body; keep the status text
  }
  const detail =
    typeof body["detail"] === "string"
      ? (body["detail"] as string)
      : response.statusText;
  throw new ApiError(response.status, detail, body);
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) await parseError(response);
    return response.json();
  }

  private async post<T>(path: string, payload?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: payload === undefined ? null : JSON.stringify(payload),
    });
    if (!response.ok) await parseError(response);
    return response.json();
  }

  async createSession(): Promise<string> {
    const created = await this.post<{ session_id: string }>("/v1/sessions");
    return created.session_id;
  }

  ask(sessionId: string, request: AskRequest): Promise<AskResponse> {
    return this.post(`/v1/sessions/${sessionId}/ask`, request);
  }

  listTraces(): Promise<TraceSummary[]> {
    return this.get("/v1/traces");
  }

  traceRecords(traceId: string): Promise<TimestepRecordView[]> {
    return this.get(`/v1/traces/${traceId}/records`);
  }
}
