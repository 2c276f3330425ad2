/**
 * Client-side telemetry buffer: batches captured events and streams them to
 * the ingestion service with a strictly increasing per-session sequence
 * number.
 *
 * Delivery rules:
 *  - one batch in flight at a time, so batches arrive in order;
 *  - a failed batch is retried verbatim with the same seq (the service
 *    deduplicates on seq, so a lost ack cannot duplicate events);
 *  - when more than `maxPending` events are buffered, the oldest MouseMove
 *    events are shed first and a telemetry_dropped marker records the loss.
 */

import type { TaskloadApi } from './api.js';
import type { InputEvent } from './events.js';

export const DEFAULT_MAX_PENDING = 50_000;
export const DEFAULT_FLUSH_INTERVAL_MS = 1_000;

export type IngestApi = Pick<TaskloadApi, 'ingestEvents'>;

export class TelemetryBuffer {
  private pending: InputEvent[] = [];
  private inFlight: InputEvent[] | null = null;
  private nextSeq = 1;
  private timer: ReturnType<typeof setInterval> | null = null;
  private flushing = false;
  private droppedTotal = 0;

  constructor(
    private readonly api: IngestApi,
    private readonly sessionId: string,
    private readonly maxPending: number = DEFAULT_MAX_PENDING,
  ) {}

  get pendingCount(): number {
    return this.pending.length + (this.inFlight?.length ?? 0);
  }

  get lastAckedSeq(): number {
    return this.nextSeq - 1;
  }

  get droppedEvents(): number {
    return this.droppedTotal;
  }

  push(event: InputEvent): void {
    this.pending.push(event);
    if (this.pending.length > this.maxPending) {
      this.shedOldestMoves(event.t);
    }
  }

  /** Shed down to 90% of capacity so one marker covers a burst of drops. */
  private shedOldestMoves(markerTime: number): void {
    const target = Math.floor(this.maxPending * 0.9);
    const excess = this.pending.length - target;
    let removed = 0;
    const kept: InputEvent[] = [];
    for (const event of this.pending) {
      if (removed < excess && event.type === 'mouse_move') {
        removed += 1;
      } else {
        kept.push(event);
      }
    }
    if (removed === 0) {
      return; // nothing sheddable: only non-move events are pending
    }
    this.droppedTotal += removed;
    kept.push({ t: markerTime, type: 'telemetry_dropped', dropped: removed });
    this.pending = kept;
  }

  /** Send one batch; resolves false when the attempt failed (it will retry). */
  async flush(): Promise<boolean> {
    if (this.flushing) {
      return false;
    }
    if (this.inFlight === null) {
      if (this.pending.length === 0) {
        return true;
      }
      this.inFlight = this.pending;
      this.pending = [];
    }
    this.flushing = true;
    try {
      await this.api.ingestEvents(this.sessionId, this.nextSeq, this.inFlight);
      this.nextSeq += 1;
      this.inFlight = null;
      return true;
    } catch {
      return false; // batch retained verbatim; next flush retries the same seq
    } finally {
      this.flushing = false;
    }
  }

  /** Flush until everything buffered so far is acked (or attempts run out). */
  async drain(maxAttempts = 10): Promise<boolean> {
    for (let attempt = 0; attempt < maxAttempts; attempt++) {
      if (this.pendingCount === 0) {
        return true;
      }
      await this.flush();
    }
    return this.pendingCount === 0;
  }

  start(intervalMs: number = DEFAULT_FLUSH_INTERVAL_MS): void {
    if (this.timer !== null) {
      return;
    }
    this.timer = setInterval(() => {
      void this.flush();
    }, intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
