export interface StartSessionResponse {
  session_id: string;
  prefix: string;
  budget: number;
  sentence_length: number;
}

export interface GuessResponse {
  correct: boolean;
  revealed_symbol: string | null;
  budget_remaining: number;
  session_status: 'active' | 'completed' | 'abandoned';
  position: number;
  attempts_so_far: number;
}

export interface ApiError {
  code: string;
  message: string;
  retryAfterMs?: number;
}

export class RateLimitedError extends Error {
  constructor(public retryAfterMs: number) {
    super(`rate limited, retry after ${retryAfterMs}ms`);
  }
}

export class RequestFailed extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = fetch.bind(globalThis),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (resp.status === 429) {
      const retryAfter = parseFloat(resp.headers.get('Retry-After') ?? '0.3');
      throw new RateLimitedError(Math.ceil(retryAfter * 1000));
    }
    const payload = await resp.json();
    if (!resp.ok) {
      throw new RequestFailed(resp.status, payload.code ?? 'error', payload.message ?? '');
    }
    return payload as T;
  }

  async register(displayName?: string): Promise<string> {
    const body = displayName ? { display_name: displayName } : {};
    const resp = await this.post<{ participant_id: string }>('/api/participants', body);
    return resp.participant_id;
  }

  startSession(participantId: string): Promise<StartSessionResponse> {
    return this.post<StartSessionResponse>('/api/sessions', {
      participant_id: participantId,
    });
  }

  guess(sessionId: string, symbol: string): Promise<GuessResponse> {
    return this.post<GuessResponse>(`/api/sessions/${sessionId}/guesses`, { symbol });
  }

  abandon(sessionId: string): Promise<{ session_id: string; status: string }> {
    return this.post(`/api/sessions/${sessionId}/abandon`, {});
  }
}
