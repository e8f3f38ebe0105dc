// Typed client for the coachbot HTTP API.

export interface TraceCandidate {
  post_id: string;
  reply_index: number;
  match_score: number;
  probability: number;
  text: string;
}

export interface RetrievedPost {
  post_id: string;
  similarity: number;
}

export interface ChatTrace {
  retrieved: RetrievedPost[];
  candidates: TraceCandidate[];
  selected_index: number;
  policy: string;
  seed: number;
  fallback: boolean;
}

export interface ChatRequest {
  session_id: string;
  utterance: string;
  policy?: 'argmax' | 'sample';
  temperature?: number;
  seed?: number;
}

export interface ChatResponseBody {
  response_text: string;
  session_id: string;
  trace: ChatTrace;
}

export interface HealthBody {
  status: string;
  corpus_posts: number;
  corpus_replies: number;
  model_dims: { titles: number; replies: number };
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
  ) {
    super(`api error ${status}: ${code}`);
  }
}

export interface ChatApi {
  chat(request: ChatRequest): Promise<ChatResponseBody>;
}

/** fetch-backed client; the base URL points at a running `coachbot serve`. */
export class HttpChatApi implements ChatApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  async chat(request: ChatRequest): Promise<ChatResponseBody> {
    const response = await this.fetchFn(this.url('/v1/chat'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
    });
    if (!response.ok) {
      const code = await errorCode(response);
      throw new ApiError(response.status, code);
    }
    return (await response.json()) as ChatResponseBody;
  }

  async health(): Promise<HealthBody> {
    const response = await this.fetchFn(this.url('/v1/health'));
    if (!response.ok) {
      throw new ApiError(response.status, await errorCode(response));
    }
    return (await response.json()) as HealthBody;
  }
}

async function errorCode(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { error?: string };
    return body.error ?? 'unknown_error';
  } catch {
    return 'unknown_error';
  }
}
