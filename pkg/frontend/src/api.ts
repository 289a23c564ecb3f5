/**
 * Thin JSON client over the engine service. No provider keys live here;
 * the browser only ever talks to the engine's own endpoints.
 */

import type {
  ActivationsRecord,
  CompareRecord,
  EvaluationRecord,
  HealthRecord,
  MatrixRecord,
  ProfileRecord,
  SynthesisRecord,
} from './types';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  readonly code: string;
  readonly requestId: string;
  readonly status: number;

  constructor(status: number, code: string, message: string, requestId: string) {
    super(message);
    this.name = 'ServiceError';
    this.status = status;
    this.code = code;
    this.requestId = requestId;
  }
}

export interface SynthesizeBody {
  framing?: string | null;
  top_n?: number | null;
  threshold?: number | null;
  baseline?: boolean;
  profile?: ProfileRecord | null;
}

export interface EvaluateBody {
  synthesis: string;
  input_ids?: string[] | null;
  variant_label?: string;
}

export interface Client {
  health(): Promise<HealthRecord>;
  activations(profile: ProfileRecord): Promise<ActivationsRecord>;
  matrix(scheme?: string): Promise<MatrixRecord>;
  synthesize(body: SynthesizeBody): Promise<SynthesisRecord>;
  evaluate(body: EvaluateBody): Promise<EvaluationRecord>;
  compare(framing: string, topN: number, profile?: ProfileRecord): Promise<CompareRecord>;
}

async function toServiceError(response: Response): Promise<ServiceError> {
  let code = 'service_error';
  let message = `service returned ${response.status}`;
  let requestId = response.headers.get('X-Request-ID') ?? '';
  try {
    const body = await response.json();
    if (body && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
      requestId = body.error.request_id ?? requestId;
    }
  } catch {
    // non-JSON error body; keep the status-line message
  }
  return new ServiceError(response.status, code, message, requestId);
}

export function createClient(baseUrl: string, fetchImpl: FetchLike): Client {
  const root = baseUrl.replace(/\/$/, '');

  async function request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetchImpl(root + path, init);
    if (!response.ok) throw await toServiceError(response);
    return (await response.json()) as T;
  }

  function post<T>(path: string, body: unknown): Promise<T> {
    return request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  return {
    health: () => request<HealthRecord>('/health'),
    activations: (profile) => post<ActivationsRecord>('/activations', profile),
    matrix: (scheme) =>
      request<MatrixRecord>(scheme ? `/matrix?scheme=${encodeURIComponent(scheme)}` : '/matrix'),
    synthesize: (body) => post<SynthesisRecord>('/synthesize', body),
    evaluate: (body) => post<EvaluationRecord>('/evaluate', body),
    compare: (framing, topN, profile) =>
      post<CompareRecord>('/compare', { framing, top_n: topN, profile: profile ?? null }),
  };
}
