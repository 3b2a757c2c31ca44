import type { GuessResponse } from './api';

export type SessionStatus = 'active' | 'completed' | 'abandoned';

/** Client-side view of one guessing session. The server is the authority;
 * this mirrors only what it has revealed. */
export interface UiSessionView {
  sessionId: string;
  revealedText: string;
  budgetRemaining: number;
  sentenceLength: number;
  wrongGuessesCurrent: Set<string>;
  lockedUntil: number; // epoch ms; input disabled while now < lockedUntil
  status: SessionStatus;
  guessesUsed: number;
  correctGuesses: number;
  requestInFlight: boolean;
}

export function newSessionView(
  sessionId: string,
  prefix: string,
  budget: number,
  sentenceLength: number,
): UiSessionView {
  return {
    sessionId,
    revealedText: prefix,
    budgetRemaining: budget,
    sentenceLength,
    wrongGuessesCurrent: new Set(),
    lockedUntil: 0,
    status: 'active',
    guessesUsed: 0,
    correctGuesses: 0,
    requestInFlight: false,
  };
}

/** Fold a server guess outcome into the view. The revealed text grows by
 * exactly one character per correct guess; never more. */
export function applyOutcome(
  view: UiSessionView,
  outcome: GuessResponse,
  symbol: string,
  now: number,
  lockoutMs: number,
): UiSessionView {
  const next: UiSessionView = {
    ...view,
    budgetRemaining: outcome.budget_remaining,
    status: outcome.session_status,
    guessesUsed: view.guessesUsed + 1,
    lockedUntil: now + lockoutMs,
    requestInFlight: false,
    wrongGuessesCurrent: new Set(view.wrongGuessesCurrent),
  };
  if (outcome.correct && outcome.revealed_symbol !== null) {
    next.revealedText = view.revealedText + outcome.revealed_symbol;
    next.correctGuesses = view.correctGuesses + 1;
    next.wrongGuessesCurrent = new Set();
  } else {
    next.wrongGuessesCurrent.add(symbol);
  }
  return next;
}

export function applyRateLimit(
  view: UiSessionView,
  retryAfterMs: number,
  now: number,
): UiSessionView {
  return { ...view, lockedUntil: now + retryAfterMs, requestInFlight: false };
}

export type KeyVerdict = 'send' | 'ignored' | 'locked' | 'busy' | 'inactive';

/** Decide what a symbol press should do. Repeats of current wrong guesses
 * and non-alphabet symbols are dropped locally; during lockout or while a
 * request is in flight nothing is queued. */
export function keyVerdict(
  view: UiSessionView,
  symbol: string | null,
  now: number,
): KeyVerdict {
  if (view.status !== 'active') return 'inactive';
  if (symbol === null || view.wrongGuessesCurrent.has(symbol)) return 'ignored';
  if (now < view.lockedUntil) return 'locked';
  if (view.requestInFlight) return 'busy';
  return 'send';
}
