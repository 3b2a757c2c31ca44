import { ApiClient, RateLimitedError } from './api';
import { normalizeKey } from './alphabet';
import {
  UiSessionView,
  applyOutcome,
  applyRateLimit,
  keyVerdict,
  newSessionView,
} from './state';
import { renderSession } from './render';

export interface ControllerOptions {
  lockoutMs?: number;
  now?: () => number;
}

/** Wires keyboard/clicks to the API and keeps the view in sync.
 * At most one guess request is in flight per session; outcomes are applied
 * in server order because the next send is gated on the previous response. */
export class SessionController {
  view: UiSessionView | null = null;
  private lockoutMs: number;
  private now: () => number;
  private participantId: string | null = null;

  constructor(
    private api: ApiClient,
    private container: HTMLElement,
    options: ControllerOptions = {},
  ) {
    this.lockoutMs = options.lockoutMs ?? 300;
    this.now = options.now ?? (() => Date.now());
  }

  async start(): Promise<void> {
    if (this.participantId === null) {
      this.participantId = await this.api.register();
    }
    const resp = await this.api.startSession(this.participantId);
    this.view = newSessionView(resp.session_id, resp.prefix, resp.budget, resp.sentence_length);
    this.render();
  }

  /** Handle a key press or on-screen key click; resolves when the guess
   * round-trip (if any) finishes. Returns the verdict for testability. */
  async handleKey(key: string): Promise<string> {
    if (!this.view) return 'inactive';
    const symbol = normalizeKey(key);
    const verdict = keyVerdict(this.view, symbol, this.now());
    if (verdict !== 'send') {
      return verdict;
    }
    this.view = { ...this.view, requestInFlight: true };
    try {
      const outcome = await this.api.guess(this.view.sessionId, symbol!);
      this.view = applyOutcome(this.view, outcome, symbol!, this.now(), this.lockoutMs);
    } catch (err) {
      if (err instanceof RateLimitedError) {
        this.view = applyRateLimit(this.view, err.retryAfterMs, this.now());
      } else {
        this.view = { ...this.view, requestInFlight: false };
        throw err;
      }
    } finally {
      this.render();
    }
    return verdict;
  }

  attach(): void {
    document.addEventListener('keydown', (e) => {
      if (e.key.length === 1 || e.key === 'Spacebar') {
        void this.handleKey(e.key);
      }
    });
    this.container.addEventListener('click', (e) => {
      const target = e.target as HTMLElement;
      if (target.classList?.contains('key') && target.dataset.symbol) {
        void this.handleKey(target.dataset.symbol);
      }
      if (target.classList?.contains('start-again')) {
        void this.start();
      }
    });
  }

  render(): void {
    if (this.view) renderSession(this.container, this.view, this.now());
  }
}
