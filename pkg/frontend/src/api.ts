/**
 * Typed client for the repair service. Every number the UI shows comes
 * from these payloads; nothing is computed client-side.
 */

export type Value = number | boolean | string | Array<number | string> | null;

export interface TraceStep {
  step: number;
  loc: number | "exit";
  vars: Record<string, Value>;
}

export interface TraceResponse {
  steps: TraceStep[];
  terminated: boolean;
  fault?: { loc: number | string; reason: string };
}

export interface PatchEntry {
  line: number;
  before: string;
  after: string;
}

export interface RepairResultDoc {
  status: "repaired" | "no_repair" | "timeout";
  reason?: string;
  patch: PatchEntry[];
  syntactic: number | null;
  semantic: number | null;
  cost: number | null;
  satisfying_index: number | null;
  stats: Record<string, unknown>;
  patched_source?: string;
}

export interface SessionResponse {
  session_id: string;
  result: RepairResultDoc;
}

export interface ManipulationRequest {
  input: Record<string, Value>;
  index: number;
  values: Record<string, Value | "?">;
  tests?: Array<{ input: Record<string, Value>; output: Value }>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public body?: unknown,
  ) {
    super(message);
  }
}

async function post<T>(base: string, path: string, body: unknown): Promise<T> {
  const resp = await fetch(base + path, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  const payload = await resp.json().catch(() => undefined);
  if (!resp.ok) {
    const detail =
      payload && typeof payload === "object" && "detail" in payload
        ? String((payload as { detail: unknown }).detail)
        : resp.statusText;
    throw new ApiError(resp.status, detail, payload);
  }
  return payload as T;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  async health(): Promise<boolean> {
    try {
      const resp = await fetch(this.base + "/api/health");
      return resp.ok;
    } catch {
      return false;
    }
  }

  trace(
    program: string,
    input: Record<string, Value>,
    fuel?: number,
  ): Promise<TraceResponse> {
    const body: Record<string, unknown> = { program, input };
    if (fuel !== undefined) body.fuel = fuel;
    return post<TraceResponse>(this.base, "/api/trace", body);
  }

  openSession(
    program: string,
    manipulation: ManipulationRequest,
    options?: Record<string, unknown>,
  ): Promise<SessionResponse> {
    return post<SessionResponse>(this.base, "/api/session", {
      program,
      manipulation,
      options: options ?? {},
    });
  }

  reject(
    sessionId: string,
    kind: "patch" | "location",
    location?: number,
  ): Promise<{ result: RepairResultDoc }> {
    const body: Record<string, unknown> = { kind };
    if (location !== undefined) body.location = location;
    return post<{ result: RepairResultDoc }>(
      this.base,
      `/api/session/${sessionId}/reject`,
      body,
    );
  }

  async getSession(sessionId: string): Promise<Record<string, unknown>> {
    const resp = await fetch(this.base + `/api/session/${sessionId}`);
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return (await resp.json()) as Record<string, unknown>;
  }
}
