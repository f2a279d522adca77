import type { ChatTurnPayload, SessionResponse, TraceResponse } from "./types.js";

/** Server-reported or transport-level failure.  Transport problems get
 *  status 0 and code "network_error" so callers can offer a retry. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, "network_error", String(err));
    }
    const body: unknown = await resp.json().catch(() => null);
    if (!resp.ok) {
      const rec = body as Record<string, unknown> | null;
      const code = rec && typeof rec.code === "string" ? rec.code : "http_error";
      const message =
        rec && typeof rec.message === "string" ? rec.message : `status ${resp.status}`;
      throw new ApiError(resp.status, code, message);
    }
    return body as T;
  }

  newSession(): Promise<SessionResponse> {
    return this.request("/api/session", { method: "POST" });
  }

  postMessage(sessionId: string, text: string): Promise<ChatTurnPayload> {
    return this.request(`/api/session/${sessionId}/message`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  getTrace(sessionId: string): Promise<TraceResponse> {
    return this.request(`/api/session/${sessionId}/trace`);
  }
}
