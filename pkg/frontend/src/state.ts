/**
 * Review session state: the candidate list, the reviewer's cursor, and
 * in-flight decision tracking.
 *
 * Decisions apply optimistically so the UI never stalls on the network;
 * a failed POST rolls the candidate back and surfaces the error. The
 * store is renderer-agnostic: the UI subscribes and redraws on change.
 */

import { ApiError, CandidateView, CurationApi, Decision, StoreStats } from './api.js';

export type Filter = Decision | 'all';

export interface SessionOptions {
  annotator?: string;
}

type Listener = () => void;

export class ReviewSession {
  candidates: CandidateView[] = [];
  filter: Filter = 'all';
  cursor = 0;
  error: string | null = null;
  readonly annotator: string;

  private readonly pending = new Set<string>();
  private readonly listeners = new Set<Listener>();
  private readonly idleResolvers: Array<() => void> = [];

  constructor(
    private readonly api: CurationApi,
    options: SessionOptions = {},
  ) {
    this.annotator = options.annotator ?? '';
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Resolves once no decision requests are in flight. */
  whenIdle(): Promise<void> {
    if (this.pending.size === 0) return Promise.resolve();
    return new Promise((resolve) => this.idleResolvers.push(resolve));
  }

  private settle(id: string): void {
    this.pending.delete(id);
    if (this.pending.size === 0) {
      while (this.idleResolvers.length > 0) this.idleResolvers.shift()?.();
    }
  }

  isPending(id: string): boolean {
    return this.pending.has(id);
  }

  async load(): Promise<void> {
    this.candidates = await this.api.listCandidates();
    this.cursor = Math.min(this.cursor, Math.max(0, this.visible().length - 1));
    this.error = null;
    this.notify();
  }

  /** Candidates passing the active filter, in server (id) order. */
  visible(): CandidateView[] {
    if (this.filter === 'all') return this.candidates;
    return this.candidates.filter((c) => c.decision === this.filter);
  }

  selected(): CandidateView | null {
    return this.visible()[this.cursor] ?? null;
  }

  setFilter(filter: Filter): void {
    if (filter === this.filter) return;
    this.filter = filter;
    this.cursor = 0;
    this.notify();
  }

  select(index: number): void {
    const count = this.visible().length;
    if (count === 0) {
      this.cursor = 0;
    } else {
      this.cursor = Math.max(0, Math.min(index, count - 1));
    }
    this.notify();
  }

  next(): void {
    this.select(this.cursor + 1);
  }

  prev(): void {
    this.select(this.cursor - 1);
  }

  /** Counts computed from the loaded list; mirrors the server's /stats. */
  stats(): StoreStats {
    const stats: StoreStats = {
      total: this.candidates.length,
      accepted: 0,
      rejected: 0,
      undecided: 0,
    };
    for (const candidate of this.candidates) stats[candidate.decision] += 1;
    return stats;
  }

  async decide(id: string, decision: Decision): Promise<void> {
    const candidate = this.candidates.find((c) => c.id === id);
    if (!candidate || this.pending.has(id)) return;
    const previous = candidate.decision;
    candidate.decision = decision;
    this.pending.add(id);
    this.notify();
    try {
      const confirmed = await this.api.postDecision(id, decision, this.annotator);
      candidate.decision = confirmed.decision;
      this.error = null;
    } catch (err) {
      candidate.decision = previous;
      this.error = err instanceof ApiError ? err.detail : String(err);
    } finally {
      this.settle(id);
      this.notify();
    }
  }

  /** Apply a decision to the candidate under the cursor. */
  decideSelected(decision: Decision): Promise<void> {
    const candidate = this.selected();
    if (!candidate) return Promise.resolve();
    return this.decide(candidate.id, decision);
  }

  async exportAccepted(outDir: string): Promise<string> {
    try {
      const result = await this.api.exportAccepted(outDir);
      this.error = null;
      this.notify();
      return `exported ${result.exported} pairs to ${result.manifest}`;
    } catch (err) {
      this.error = err instanceof ApiError ? err.detail : String(err);
      this.notify();
      throw err;
    }
  }
}
