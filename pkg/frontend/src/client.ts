import type {
  JudgmentAck,
  NewItem,
  NextPair,
  RankingRow,
  SessionSummary,
  SkipAck,
  TrainResult,
} from "./types.js";

/** Error carrying the service's {code, message} body and HTTP status. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = "unknown";
  let message = `${resp.status} ${resp.statusText}`;
  try {
    const body = await resp.json();
    if (body && typeof body.code === "string") {
      code = body.code;
      message = body.message ?? message;
    }
  } catch {
    // non-JSON error body, keep the status line
  }
  return new ApiError(resp.status, code, message);
}

/** What the view layer needs from the service; ApiClient is the real one. */
export interface Api {
  createSession(dataset: string, k: number, seed: number): Promise<SessionSummary>;
  getSession(sessionId: string): Promise<SessionSummary>;
  nextPair(sessionId: string): Promise<NextPair>;
  submitJudgment(sessionId: string, pairIndex: number, choice: "A" | "B"): Promise<JudgmentAck>;
  skip(sessionId: string, pairIndex: number): Promise<SkipAck>;
  train(sessionId: string): Promise<TrainResult>;
  ranking(sessionId: string, newItems?: NewItem[]): Promise<{ ranking: RankingRow[] }>;
}

/**
 * Thin typed wrapper over the service API. No retries, no caching:
 * every response is handed back verbatim for the view layer to render.
 */
export class ApiClient implements Api {
  constructor(private readonly base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.base + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      throw await parseError(resp);
    }
    return (await resp.json()) as T;
  }

  createSession(dataset: string, k: number, seed: number): Promise<SessionSummary> {
    return this.request("POST", "/sessions", { dataset, k, seed });
  }

  getSession(sessionId: string): Promise<SessionSummary> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  nextPair(sessionId: string): Promise<NextPair> {
    return this.request("GET", `/sessions/${sessionId}/next-pair`);
  }

  submitJudgment(sessionId: string, pairIndex: number, choice: "A" | "B"): Promise<JudgmentAck> {
    return this.request("POST", `/sessions/${sessionId}/judgments`, {
      pair_index: pairIndex,
      choice,
    });
  }

  skip(sessionId: string, pairIndex: number): Promise<SkipAck> {
    return this.request("POST", `/sessions/${sessionId}/skip`, { pair_index: pairIndex });
  }

  train(sessionId: string): Promise<TrainResult> {
    return this.request("POST", `/sessions/${sessionId}/train`, { config: {} });
  }

  ranking(sessionId: string, newItems: NewItem[] = []): Promise<{ ranking: RankingRow[] }> {
    if (newItems.length === 0) {
      return this.request("GET", `/sessions/${sessionId}/ranking`);
    }
    return this.request("POST", `/sessions/${sessionId}/ranking`, { new_items: newItems });
  }
}
