/** Typed client for the grading service. The fetch implementation is
 * injected so tests can run against an in-memory fixture service. */

import {
  ApiError,
  FeedbackResponse,
  GradeResponse,
  SessionState,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function asError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body?.detail === "string") detail = body.detail;
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(response.status, detail);
}

export class GradingApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch.bind(globalThis),
  ) {}

  private async json<T>(url: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + url, init);
    if (!response.ok) throw await asError(response);
    return (await response.json()) as T;
  }

  createSession(): Promise<SessionState> {
    return this.json<SessionState>("/sessions", { method: "POST" });
  }

  getSession(id: string): Promise<SessionState> {
    return this.json<SessionState>(`/sessions/${id}`);
  }

  uploadInput(id: string, archive: Blob, fps = 24): Promise<SessionState> {
    return this.json<SessionState>(`/sessions/${id}/input?fps=${fps}`, {
      method: "PUT",
      body: archive,
    });
  }

  uploadReference(id: string, payload: Blob, fps = 24): Promise<SessionState> {
    return this.json<SessionState>(`/sessions/${id}/reference?fps=${fps}`, {
      method: "PUT",
      body: payload,
    });
  }

  grade(id: string): Promise<GradeResponse> {
    return this.json<GradeResponse>(`/sessions/${id}/grade`, { method: "POST" });
  }

  feedback(id: string, prompt: string): Promise<FeedbackResponse> {
    return this.json<FeedbackResponse>(`/sessions/${id}/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ prompt }),
    });
  }

  undo(id: string, toIndex: number): Promise<SessionState> {
    return this.json<SessionState>(`/sessions/${id}/undo`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ to_index: toIndex }),
    });
  }

  /** Raw graded-frame bytes; the UI never derives pixels locally. */
  async preview(id: string, frame: number, signal?: AbortSignal): Promise<Uint8Array> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${id}/preview/${frame}`, {
      signal,
    });
    if (!response.ok) throw await asError(response);
    return new Uint8Array(await response.arrayBuffer());
  }

  exportCubeUrl(id: string): string {
    return `${this.baseUrl}/sessions/${id}/export.cube`;
  }

  exportClipUrl(id: string): string {
    return `${this.baseUrl}/sessions/${id}/export`;
  }
}
