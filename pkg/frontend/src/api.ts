/**
 * Typed client for the morphing service's JSON API.
 *
 * The transport is injectable: anything that looks enough like fetch will do,
 * which is how the test suite swaps in a mocked service.
 */

export interface SessionRecord {
  session_id: string;
  source_prompt: string;
  target_prompt: string;
  seed: number;
  steps: number;
  state: "pending" | "ready" | "failed";
  source_tokens: string[];
  target_tokens: string[];
  error: string | null;
}

export interface MorphBody {
  alpha: number;
  components?: string;
  source_weights?: number[];
  target_weights?: number[];
}

export interface SweepBody {
  alpha_step?: number;
  method?: string;
}

export interface WireRequestInit {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
  signal?: AbortSignal;
}

export interface WireResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  arrayBuffer(): Promise<ArrayBuffer>;
}

export type FetchLike = (path: string, init?: WireRequestInit) => Promise<WireResponse>;

/** Non-2xx reply, carrying the server's message and optional offending field. */
export class ServiceError extends Error {
  readonly status: number;
  readonly field: string | null;

  constructor(status: number, message: string, field: string | null = null) {
    super(message);
    this.name = "ServiceError";
    this.status = status;
    this.field = field;
  }
}

async function raise(response: WireResponse): Promise<never> {
  let message = `request failed with status ${response.status}`;
  let field: string | null = null;
  try {
    const body = (await response.json()) as { error?: string; field?: string };
    if (typeof body.error === "string") message = body.error;
    if (typeof body.field === "string") field = body.field;
  } catch {
    // non-JSON error body; the status line is all we have
  }
  throw new ServiceError(response.status, message, field);
}

export class ServiceClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn?: FetchLike) {
    this.base = base;
    this.fetchFn = fetchFn ?? ((path, init) => globalThis.fetch(path, init));
  }

  private async postJson<T>(path: string, payload: string, signal?: AbortSignal): Promise<T> {
    const response = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: payload,
      signal,
    });
    if (!response.ok) await raise(response);
    return (await response.json()) as T;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    if (!response.ok) await raise(response);
    return (await response.json()) as T;
  }

  private async getAudio(path: string, signal?: AbortSignal): Promise<ArrayBuffer> {
    const response = await this.fetchFn(this.base + path, { signal });
    if (!response.ok) await raise(response);
    return response.arrayBuffer();
  }

  async createSession(
    sourcePrompt: string,
    targetPrompt: string,
    seed?: number,
    steps?: number,
  ): Promise<string> {
    const body: Record<string, unknown> = {
      source_prompt: sourcePrompt,
      target_prompt: targetPrompt,
    };
    if (seed !== undefined) body.seed = seed;
    if (steps !== undefined) body.steps = steps;
    const reply = await this.postJson<{ session_id: string }>(
      "/api/sessions",
      JSON.stringify(body),
    );
    return reply.session_id;
  }

  getSession(sessionId: string): Promise<SessionRecord> {
    return this.getJson(`/api/sessions/${sessionId}`);
  }

  /**
   * Request a morph render. `payload` is the already-serialized JSON body:
   * the caller keys its audio cache by this exact string, so serialization
   * happens once, on their side.
   */
  async requestMorph(sessionId: string, payload: string, signal?: AbortSignal): Promise<string> {
    const reply = await this.postJson<{ morph_id: string }>(
      `/api/sessions/${sessionId}/morphs`,
      payload,
      signal,
    );
    return reply.morph_id;
  }

  async requestSweep(sessionId: string, body: SweepBody, signal?: AbortSignal): Promise<string[]> {
    const reply = await this.postJson<{ morph_ids: string[] }>(
      `/api/sessions/${sessionId}/sweep`,
      JSON.stringify(body),
      signal,
    );
    return reply.morph_ids;
  }

  morphAudio(morphId: string, signal?: AbortSignal): Promise<ArrayBuffer> {
    return this.getAudio(`/api/morphs/${morphId}/audio`, signal);
  }

  sessionAudio(sessionId: string, which: "source" | "target"): Promise<ArrayBuffer> {
    return this.getAudio(`/api/sessions/${sessionId}/audio/${which}`);
  }
}
