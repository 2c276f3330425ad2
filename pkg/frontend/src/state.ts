/**
 * Client mirror of the server session state, updated from acknowledged
 * action responses only (never speculatively).
 */

import type { ActionResponse, TransactionView } from './api.js';

export const KNOWN_PHASES = [
  'idle',
  'transaction_selected',
  'verifying',
  'credential_prompt',
  'confidence_prompt',
] as const;

export interface UiState {
  phase: string;
  transactions: TransactionView[];
  activeTxId: string | null;
  awaitingKss: boolean;
  pendingKssAt: number;
  completedTx: number;
  correctTx: number;
  credentialRejected: boolean;
  selectedTxId: string | null; // local highlight, mirrors activeTxId after ack
}

export function initialState(): UiState {
  return {
    phase: 'idle',
    transactions: [],
    activeTxId: null,
    awaitingKss: false,
    pendingKssAt: 0,
    completedTx: 0,
    correctTx: 0,
    credentialRejected: false,
    selectedTxId: null,
  };
}

export function isKnownPhase(phase: string): boolean {
  return (KNOWN_PHASES as readonly string[]).includes(phase);
}

export function applyActionResponse(state: UiState, response: ActionResponse): UiState {
  // sticky while the prompt is open: later responses (e.g. ticks) carry no
  // credential_result event and must not clear the visible error
  const rejectedNow = response.events.some(
    (event) => event['type'] === 'credential_result' && event['ok'] === false,
  );
  const credentialRejected =
    rejectedNow || (response.phase === 'credential_prompt' && state.credentialRejected);
  return {
    ...state,
    phase: response.phase,
    transactions: response.transactions,
    activeTxId: response.active_tx_id,
    awaitingKss: response.awaiting_kss,
    pendingKssAt: response.pending_kss_at,
    completedTx: response.completed_tx,
    correctTx: response.correct_tx,
    credentialRejected,
    selectedTxId: response.active_tx_id,
  };
}

/** The participant's verification task: both pairs must match to confirm. */
export function correctDecision(tx: TransactionView): 'confirm' | 'report' {
  const amountsMatch = tx.amount_due === tx.amount_transferred;
  const accountsMatch = tx.account_listed === tx.account_verification;
  return amountsMatch && accountsMatch ? 'confirm' : 'report';
}
