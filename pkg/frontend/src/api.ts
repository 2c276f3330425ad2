/**
 * Typed client for the ingestion service's HTTP API. `fetch` is injectable
 * so tests can stub the network.
 */

import type { InputEvent } from './events.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface SessionDescriptor {
  session_id: string;
  subject_id: string;
  started_at: string;
}

export interface TransactionView {
  tx_id: string;
  payment_method: string;
  bank_name: string;
  account_listed: string;
  account_verification: string;
  payer_name: string;
  amount_due: number;
  amount_transferred: number;
}

export type Phase =
  | 'idle'
  | 'transaction_selected'
  | 'verifying'
  | 'credential_prompt'
  | 'confidence_prompt';

export interface ActionResponse {
  phase: Phase | string;
  awaiting_kss: boolean;
  pending_kss_at: number;
  completed_tx: number;
  correct_tx: number;
  events: Array<Record<string, unknown>>;
  transactions: TransactionView[];
  active_tx_id: string | null;
}

export type Action =
  | { type: 'select_tx'; tx_id: string; now: number }
  | { type: 'go'; now: number }
  | { type: 'decide'; decision: 'confirm' | 'report'; now: number }
  | { type: 'submit_credentials'; username: string; password: string; now: number }
  | { type: 'submit_confidence'; rating: number; now: number }
  | { type: 'submit_kss'; score: number; now: number }
  | { type: 'tick'; now: number };

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = 'http_error';
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { error?: string; detail?: string };
    code = body.error ?? code;
    detail = body.detail ?? detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, detail);
}

export class TaskloadApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  createSession(subjectId: string, config?: Record<string, unknown>): Promise<SessionDescriptor> {
    return this.post('/v1/sessions', { subject_id: subjectId, config: config ?? {} });
  }

  ingestEvents(sessionId: string, seq: number, events: InputEvent[]): Promise<{ last_seq: number }> {
    return this.post(`/v1/sessions/${sessionId}/events`, { seq, events });
  }

  act(sessionId: string, action: Action): Promise<ActionResponse> {
    return this.post(`/v1/sessions/${sessionId}/actions`, action);
  }

  async exportSession(sessionId: string): Promise<string> {
    const response = await this.fetchImpl(`${this.baseUrl}/v1/sessions/${sessionId}/export`);
    if (!response.ok) {
      throw await parseError(response);
    }
    return response.text();
  }

  closeSession(sessionId: string): Promise<{ status: string }> {
    return this.post(`/v1/sessions/${sessionId}/close`, {});
  }
}
