// Thin typed client for the session API.  The server is the only authority
// on legality; this module never inspects or validates moves.

export interface RunItem {
  by: "T" | "B";
  m: string;
}

export interface SessionState {
  id: string;
  formula: string;
  currentFormulaView: string;
  humanRole: "environment" | "machine";
  legalMoves: string[];
  run: RunItem[];
  status: "open" | "finished";
  winner?: "T" | "B";
}

export interface SessionRequest {
  formula: string;
  humanRole: "environment" | "machine";
  interpretation?: {
    elementary?: Record<string, "tt" | "ff">;
    general?: Record<string, string>;
  };
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

const RUN_ITEM = (x: unknown): x is RunItem =>
  typeof x === "object" && x !== null &&
  ((x as RunItem).by === "T" || (x as RunItem).by === "B") &&
  typeof (x as RunItem).m === "string";

/** Rejects structurally malformed payloads before they reach the renderer. */
export function parseSessionState(data: unknown): SessionState {
  const d = data as SessionState;
  if (
    typeof d !== "object" || d === null ||
    typeof d.id !== "string" ||
    typeof d.formula !== "string" ||
    typeof d.currentFormulaView !== "string" ||
    (d.humanRole !== "environment" && d.humanRole !== "machine") ||
    !Array.isArray(d.legalMoves) || !d.legalMoves.every((m) => typeof m === "string") ||
    !Array.isArray(d.run) || !d.run.every(RUN_ITEM) ||
    (d.status !== "open" && d.status !== "finished") ||
    (d.winner !== undefined && d.winner !== "T" && d.winner !== "B")
  ) {
    throw new ApiError(0, "malformed session payload");
  }
  return d;
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let res: Response;
  try {
    res = await fetch(url, init);
  } catch (e) {
    throw new ApiError(0, `network failure: ${String(e)}`);
  }
  if (res.status === 204) return undefined as T;
  const body = await res.json().catch(() => ({}));
  if (!res.ok) {
    throw new ApiError(res.status, String((body as { detail?: string }).detail ?? res.statusText));
  }
  return body as T;
}

export class ApiClient {
  constructor(public baseUrl: string = "") {}

  private url(path: string): string {
    return this.baseUrl + path;
  }

  async createSession(req: SessionRequest): Promise<SessionState> {
    return parseSessionState(await request(this.url("/api/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    }));
  }

  async getSession(id: string): Promise<SessionState> {
    return parseSessionState(await request(this.url(`/api/sessions/${id}`)));
  }

  async postMove(id: string, move: string): Promise<SessionState> {
    return parseSessionState(await request(this.url(`/api/sessions/${id}/moves`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ move }),
    }));
  }

  async deleteSession(id: string): Promise<void> {
    await request(this.url(`/api/sessions/${id}`), { method: "DELETE" });
  }
}
