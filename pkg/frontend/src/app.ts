/**
 * Application orchestration: session lifecycle, the action queue (one
 * request per user interaction, serialized so the UI always mirrors the
 * last acknowledged server phase), telemetry capture/flush, and the tick
 * loop that surfaces due KSS prompts.
 */

import { TaskloadApi, type Action, type ActionResponse } from './api.js';
import { InputCapture } from './capture.js';
import { renderWorkflow, type WorkflowHandlers } from './render.js';
import { applyActionResponse, initialState, type UiState } from './state.js';
import { DEFAULT_FLUSH_INTERVAL_MS, TelemetryBuffer } from './telemetry.js';

export interface AppOptions {
  subjectId: string;
  config?: Record<string, unknown>;
  tickIntervalMs?: number;
  flushIntervalMs?: number;
  /** wall-clock in ms; injectable for tests */
  now?: () => number;
}

export class TaskloadApp {
  state: UiState = initialState();
  sessionId: string | null = null;
  private startedAtWall = 0;
  private buffer: TelemetryBuffer | null = null;
  private capture: InputCapture | null = null;
  private tickTimer: ReturnType<typeof setInterval> | null = null;
  private actionChain: Promise<void> = Promise.resolve();
  private readonly wallClock: () => number;

  constructor(
    private readonly api: TaskloadApi,
    private readonly root: HTMLElement,
    private readonly options: AppOptions,
  ) {
    this.wallClock = options.now ?? (() => Date.now());
  }

  /** ms since session start; the telemetry and action timestamp base */
  sessionClock(): number {
    return Math.max(0, Math.round(this.wallClock() - this.startedAtWall));
  }

  async start(): Promise<void> {
    const session = await this.api.createSession(this.options.subjectId, this.options.config);
    this.sessionId = session.session_id;
    this.startedAtWall = this.wallClock();

    this.buffer = new TelemetryBuffer(this.api, session.session_id);
    this.capture = new InputCapture(
      this.root.ownerDocument,
      () => this.sessionClock(),
      (event) => this.buffer?.push(event),
    );
    this.capture.start();
    this.buffer.start(this.options.flushIntervalMs ?? DEFAULT_FLUSH_INTERVAL_MS);

    await this.dispatch({ type: 'tick', now: this.sessionClock() });
    this.tickTimer = setInterval(() => {
      void this.dispatch({ type: 'tick', now: this.sessionClock() });
    }, this.options.tickIntervalMs ?? 1_000);
  }

  async stop(): Promise<void> {
    if (this.tickTimer !== null) {
      clearInterval(this.tickTimer);
      this.tickTimer = null;
    }
    this.capture?.stop();
    this.buffer?.stop();
    await this.buffer?.drain();
    if (this.sessionId) {
      await this.api.closeSession(this.sessionId);
    }
  }

  /** Serialize actions: each user interaction becomes exactly one request. */
  dispatch(action: Action): Promise<void> {
    const run = async () => {
      if (!this.sessionId) {
        return;
      }
      try {
        const response = await this.api.act(this.sessionId, action);
        this.onResponse(response);
      } catch (error) {
        // an illegal action leaves server state unchanged; re-render as-is
        // so e.g. a stale click is simply ignored
        this.render();
        if (!(error instanceof Error) || !error.message.startsWith('illegal_action')) {
          console.error('action failed', error);
        }
      }
    };
    this.actionChain = this.actionChain.then(run);
    return this.actionChain;
  }

  private onResponse(response: ActionResponse): void {
    this.state = applyActionResponse(this.state, response);
    this.render();
  }

  private handlers(): WorkflowHandlers {
    const now = () => this.sessionClock();
    return {
      onSelectTx: (txId) => void this.dispatch({ type: 'select_tx', tx_id: txId, now: now() }),
      onGo: () => void this.dispatch({ type: 'go', now: now() }),
      onDecide: (decision) => void this.dispatch({ type: 'decide', decision, now: now() }),
      onSubmitCredentials: (username, password) =>
        void this.dispatch({ type: 'submit_credentials', username, password, now: now() }),
      onSubmitConfidence: (rating) =>
        void this.dispatch({ type: 'submit_confidence', rating, now: now() }),
      onSubmitKss: (score) => void this.dispatch({ type: 'submit_kss', score, now: now() }),
    };
  }

  render(): void {
    renderWorkflow(this.root, this.state, this.handlers());
  }
}
