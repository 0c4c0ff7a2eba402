// Review session state machine: queue of pending records, edit buffer,
// decision submission with conflict handling. Framework-free and DOM-free so
// the whole flow is unit-testable; main.ts only renders this state.

import {
  ApiError,
  Decision,
  DecisionAction,
  Progress,
  ReviewApi,
  ReviewRecord,
  Stage,
} from './api.js';

export type SessionPhase = 'loading' | 'reviewing' | 'empty' | 'error';

export function encodeQaBlock(question: string, answer: string): string {
  return `Q: ${question}\nA: ${answer}`;
}

export function parseQaBlock(text: string): { question: string; answer: string } | null {
  const stripped = text.trim();
  if (!stripped.startsWith('Q:')) return null;
  const sep = stripped.indexOf('\nA:');
  if (sep < 0) return null;
  const question = stripped.slice(2, sep).trim();
  const answer = stripped.slice(sep + 3).trim();
  if (!question) return null;
  return { question, answer };
}

const errorMessage = (err: unknown): string =>
  err instanceof Error ? err.message : String(err);

export class ReviewSession {
  phase: SessionPhase = 'loading';
  queue: ReviewRecord[] = [];
  current: ReviewRecord | null = null;
  /** Edit buffer; always initialized to the proposed text. */
  buffer = '';
  note = '';
  progress: Progress | null = null;
  /** Network failure banner; the edit buffer survives retries. */
  networkError: string | null = null;
  conflictNotice: string | null = null;
  validationError: string | null = null;

  constructor(
    private readonly api: ReviewApi,
    private readonly stage?: Stage,
  ) {}

  async start(): Promise<void> {
    this.phase = 'loading';
    await this.reload();
  }

  /** Reload the pending queue and progress from the service. */
  async reload(): Promise<void> {
    try {
      const [page, progress] = await Promise.all([
        this.api.listRecords({ stage: this.stage, status: 'pending', pageSize: 500 }),
        this.api.getProgress(this.stage),
      ]);
      this.queue = [...page.records];
      this.progress = progress;
      this.networkError = null;
      this.advance();
    } catch (err) {
      this.networkError = errorMessage(err);
      this.phase = 'error';
    }
  }

  private async refreshProgress(): Promise<void> {
    try {
      this.progress = await this.api.getProgress(this.stage);
    } catch {
      // keep the stale counts; the next decision retries
    }
  }

  private advance(): void {
    this.current = this.queue.shift() ?? null;
    if (this.current) {
      this.buffer = this.current.proposed;
      this.note = '';
      this.validationError = null;
      this.phase = 'reviewing';
    } else {
      this.phase = 'empty';
    }
  }

  /** Push the current record to the back of the queue without deciding. */
  skip(): void {
    if (!this.current) return;
    this.queue.push(this.current);
    this.advance();
  }

  /**
   * Submit a decision for the current record. Returns true when the decision
   * landed. A 409 conflict refreshes counts and skips the record; a network
   * failure leaves the record and buffer in place for retry.
   */
  async decide(action: DecisionAction): Promise<boolean> {
    if (!this.current) return false;
    if (action === 'edit' && !this.buffer.trim()) {
      this.validationError = 'An edit needs non-empty final text.';
      return false;
    }
    this.validationError = null;
    const decision: Decision = { action, expected_status: 'pending' };
    if (action === 'edit') decision.final_text = this.buffer;
    if (this.note.trim()) decision.reviewer_note = this.note.trim();
    try {
      await this.api.submitDecision(this.current.id, decision);
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        this.conflictNotice = `Already decided elsewhere: ${err.message}`;
        await this.refreshProgress();
        this.advance();
        return false;
      }
      this.networkError = errorMessage(err);
      return false; // record and buffer stay; the reviewer can retry
    }
    this.networkError = null;
    this.conflictNotice = null;
    await this.refreshProgress();
    this.advance();
    return true;
  }

  /** Decisions outstanding, straight from the service counts. */
  remaining(): number {
    return this.progress ? this.progress.pending : this.queue.length + (this.current ? 1 : 0);
  }
}
