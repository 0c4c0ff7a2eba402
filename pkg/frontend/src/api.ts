// Typed client for the review service. Exactly these routes, nothing else.

export type Stage = 'rephrase' | 'summarize' | 'synth_question' | 'context';
export type RecordStatus = 'pending' | 'accepted' | 'edited' | 'rejected' | 'failed';
export type DecisionAction = 'accept' | 'edit' | 'reject';

export interface ReviewRecord {
  id: string;
  pair_id: string;
  stage: Stage;
  original: string;
  proposed: string;
  status: RecordStatus;
  final_text: string | null;
  reviewer_note: string | null;
  model_name: string;
  created_at: string;
}

export interface RecordPage {
  records: ReviewRecord[];
  total: number;
  page: number;
  page_size: number;
}

export interface Progress {
  pending: number;
  accepted: number;
  edited: number;
  rejected: number;
  total: number;
}

export interface QaPair {
  id: string;
  source: string;
  question: string;
  answer: string;
  version: string;
  parent_id: string | null;
  provenance: string;
  context: string | null;
}

export interface Decision {
  action: DecisionAction;
  final_text?: string;
  reviewer_note?: string;
  expected_status: 'pending';
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (response.ok) return (await response.json()) as T;
  let code = 'http_error';
  let message = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the defaults
  }
  throw new ApiError(response.status, code, message);
}

export interface ListParams {
  stage?: Stage;
  status?: RecordStatus;
  page?: number;
  pageSize?: number;
}

export class ReviewApi {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async listRecords(params: ListParams = {}): Promise<RecordPage> {
    const query = new URLSearchParams();
    if (params.stage) query.set('stage', params.stage);
    if (params.status) query.set('status', params.status);
    if (params.page) query.set('page', String(params.page));
    if (params.pageSize) query.set('page_size', String(params.pageSize));
    const suffix = query.toString() ? `?${query}` : '';
    return asJson(await this.fetchFn(`${this.baseUrl}/api/records${suffix}`));
  }

  async submitDecision(recordId: string, decision: Decision): Promise<ReviewRecord> {
    const response = await this.fetchFn(
      `${this.baseUrl}/api/records/${encodeURIComponent(recordId)}/decision`,
      {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(decision),
      },
    );
    return asJson(response);
  }

  async getProgress(stage?: Stage): Promise<Progress> {
    const suffix = stage ? `?stage=${stage}` : '';
    return asJson(await this.fetchFn(`${this.baseUrl}/api/progress${suffix}`));
  }

  async getPair(pairId: string): Promise<QaPair> {
    return asJson(await this.fetchFn(`${this.baseUrl}/api/pairs/${encodeURIComponent(pairId)}`));
  }
}
