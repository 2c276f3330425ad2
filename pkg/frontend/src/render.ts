/**
 * Workflow rendering: transaction list, verification pane, credential and
 * confidence prompts, and the blocking KSS modal. The whole screen is
 * re-rendered from UiState after every acknowledged action.
 */

import type { TransactionView } from './api.js';
import { isKnownPhase, type UiState } from './state.js';

export interface WorkflowHandlers {
  onSelectTx(txId: string): void;
  onGo(): void;
  onDecide(decision: 'confirm' | 'report'): void;
  onSubmitCredentials(username: string, password: string): void;
  onSubmitConfidence(rating: number): void;
  onSubmitKss(score: number): void;
}

// Karolinska sleepiness scale anchor descriptions (odd levels are labeled)
export const KSS_LABELS: Record<number, string> = {
  1: 'Extremely alert',
  3: 'Alert, normal level',
  5: 'Neither alert nor sleepy',
  7: 'Sleepy, but no effort to keep alert',
  9: 'Very sleepy, great effort to keep alert, fighting sleep',
};

function formatAmount(minorUnits: number): string {
  return (minorUnits / 100).toFixed(2);
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value);
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function renderTransactionTable(
  doc: Document,
  state: UiState,
  handlers: WorkflowHandlers,
  disabled: boolean,
): HTMLElement {
  const section = el(doc, 'section', { id: 'transaction-list' });
  section.appendChild(el(doc, 'h2', {}, 'Transactions'));
  const table = el(doc, 'table');
  const head = el(doc, 'tr');
  for (const column of ['Transaction ID', 'Payment method', 'Bank', 'Account number']) {
    head.appendChild(el(doc, 'th', {}, column));
  }
  table.appendChild(head);
  for (const tx of state.transactions) {
    const row = el(doc, 'tr', {
      class: tx.tx_id === state.selectedTxId ? 'tx-row selected' : 'tx-row',
      'data-tx-id': tx.tx_id,
    });
    row.appendChild(el(doc, 'td', {}, tx.tx_id));
    row.appendChild(el(doc, 'td', {}, tx.payment_method));
    row.appendChild(el(doc, 'td', {}, tx.bank_name));
    row.appendChild(el(doc, 'td', {}, tx.account_listed));
    if (!disabled && state.phase === 'idle') {
      row.addEventListener('click', () => handlers.onSelectTx(tx.tx_id));
    }
    table.appendChild(row);
  }
  section.appendChild(table);

  const idEntry = el(doc, 'div', { class: 'id-entry' });
  const input = el(doc, 'input', {
    id: 'tx-id-input',
    placeholder: 'transaction ID',
    ...(disabled || state.phase !== 'idle' ? { disabled: '' } : {}),
  });
  const select = el(doc, 'button', { id: 'select-btn' }, 'Select');
  if (disabled || state.phase !== 'idle') {
    select.setAttribute('disabled', '');
  } else {
    select.addEventListener('click', () => {
      if (input.value) {
        handlers.onSelectTx(input.value);
      }
    });
  }
  const go = el(doc, 'button', { id: 'go-btn' }, 'Go');
  if (disabled || state.phase !== 'transaction_selected') {
    go.setAttribute('disabled', '');
  } else {
    go.addEventListener('click', () => handlers.onGo());
  }
  idEntry.appendChild(input);
  idEntry.appendChild(select);
  idEntry.appendChild(go);
  section.appendChild(idEntry);
  return section;
}

function renderVerificationPane(
  doc: Document,
  state: UiState,
  handlers: WorkflowHandlers,
  disabled: boolean,
): HTMLElement {
  const section = el(doc, 'section', { id: 'verification-pane' });
  section.appendChild(el(doc, 'h2', {}, 'Verification'));
  const tx = state.transactions.find((t: TransactionView) => t.tx_id === state.activeTxId);
  const showDetails = tx !== undefined && state.phase !== 'idle' && state.phase !== 'transaction_selected';
  if (showDetails && tx) {
    const fields = el(doc, 'dl');
    const pairs: Array<[string, string]> = [
      ['Payer name', tx.payer_name],
      ['Account number', tx.account_verification],
      ['Amount due', formatAmount(tx.amount_due)],
      ['Amount transferred', formatAmount(tx.amount_transferred)],
    ];
    for (const [label, value] of pairs) {
      fields.appendChild(el(doc, 'dt', {}, label));
      fields.appendChild(el(doc, 'dd', {}, value));
    }
    section.appendChild(fields);
  } else {
    section.appendChild(
      el(doc, 'p', { class: 'hint' }, 'Select a transaction and press Go to verify it.'),
    );
  }
  const confirm = el(doc, 'button', { id: 'confirm-btn' }, 'Confirm');
  const report = el(doc, 'button', { id: 'report-btn' }, 'Report');
  for (const [button, decision] of [
    [confirm, 'confirm'],
    [report, 'report'],
  ] as const) {
    if (disabled || state.phase !== 'verifying') {
      button.setAttribute('disabled', '');
    } else {
      button.addEventListener('click', () => handlers.onDecide(decision));
    }
    section.appendChild(button);
  }
  return section;
}

function renderCredentialModal(
  doc: Document,
  state: UiState,
  handlers: WorkflowHandlers,
  disabled: boolean,
): HTMLElement {
  const modal = el(doc, 'div', { id: 'credential-modal', class: 'modal' });
  modal.appendChild(el(doc, 'h3', {}, 'Enter your credentials to complete the verification'));
  if (state.credentialRejected) {
    modal.appendChild(el(doc, 'p', { id: 'credential-error' }, 'Invalid credentials, try again.'));
  }
  const username = el(doc, 'input', { id: 'username-input', placeholder: 'username' });
  const password = el(doc, 'input', { id: 'password-input', type: 'password', placeholder: 'password' });
  const submit = el(doc, 'button', { id: 'credential-submit' }, 'Submit');
  if (disabled) {
    submit.setAttribute('disabled', '');
  } else {
    submit.addEventListener('click', () =>
      handlers.onSubmitCredentials(username.value, password.value),
    );
  }
  modal.appendChild(username);
  modal.appendChild(password);
  modal.appendChild(submit);
  return modal;
}

function renderConfidenceModal(
  doc: Document,
  handlers: WorkflowHandlers,
  disabled: boolean,
): HTMLElement {
  const modal = el(doc, 'div', { id: 'confidence-modal', class: 'modal' });
  modal.appendChild(el(doc, 'h3', {}, 'How confident are you in this verification?'));
  const row = el(doc, 'div', { class: 'rating-row' });
  for (let rating = 1; rating <= 10; rating++) {
    const button = el(doc, 'button', { class: 'confidence-btn', 'data-rating': String(rating) }, String(rating));
    if (disabled) {
      button.setAttribute('disabled', '');
    } else {
      button.addEventListener('click', () => handlers.onSubmitConfidence(rating));
    }
    row.appendChild(button);
  }
  modal.appendChild(row);
  return modal;
}

function renderKssModal(doc: Document, handlers: WorkflowHandlers): HTMLElement {
  const overlay = el(doc, 'div', { id: 'kss-modal', class: 'modal blocking' });
  overlay.appendChild(el(doc, 'h3', {}, 'How sleepy do you feel right now?'));
  const list = el(doc, 'div', { class: 'kss-options' });
  for (let score = 1; score <= 9; score++) {
    const label = KSS_LABELS[score];
    const button = el(
      doc,
      'button',
      { class: 'kss-btn', 'data-score': String(score) },
      label ? `${score} - ${label}` : String(score),
    );
    button.addEventListener('click', () => handlers.onSubmitKss(score));
    list.appendChild(button);
  }
  overlay.appendChild(list);
  return overlay;
}

export function renderWorkflow(root: HTMLElement, state: UiState, handlers: WorkflowHandlers): void {
  const doc = root.ownerDocument;
  root.textContent = '';

  if (!isKnownPhase(state.phase)) {
    const banner = el(doc, 'div', { id: 'reload-banner' });
    banner.appendChild(
      el(doc, 'p', {}, 'The application is out of sync with the server. Please reload the page.'),
    );
    root.appendChild(banner);
    return;
  }

  // the KSS modal blocks every task interaction until answered
  const blocked = state.awaitingKss;

  const status = el(doc, 'div', { id: 'status-bar' });
  status.appendChild(
    el(doc, 'span', { id: 'completed-count' }, `completed: ${state.completedTx}`),
  );
  root.appendChild(status);

  root.appendChild(renderTransactionTable(doc, state, handlers, blocked));
  root.appendChild(renderVerificationPane(doc, state, handlers, blocked));
  if (state.phase === 'credential_prompt') {
    root.appendChild(renderCredentialModal(doc, state, handlers, blocked));
  }
  if (state.phase === 'confidence_prompt') {
    root.appendChild(renderConfidenceModal(doc, handlers, blocked));
  }
  if (state.awaitingKss) {
    root.appendChild(renderKssModal(doc, handlers));
  }
}
