import { beforeEach, describe, expect, it } from 'vitest';
import { ApiClient } from '../src/api';
import { SessionController } from '../src/controller';
import { FakeServer } from './fakeServer';

// 80 chars: 70-char prefix plus 10 positions to guess.
const TAIL = 'ПРИВІТ СВІ';
const SENTENCE = 'АБВГ'.repeat(17) + 'АБ' + TAIL;

function setup(options: { minIntervalMs?: number } = {}) {
  let t = 0;
  const clock = { now: () => t, advance: (ms: number) => (t += ms) };
  const server = new FakeServer({
    sentence: SENTENCE,
    minIntervalMs: options.minIntervalMs ?? 0,
    now: clock.now,
  });
  const container = document.createElement('div');
  document.body.appendChild(container);
  const api = new ApiClient('', server.fetch);
  const controller = new SessionController(api, container, {
    lockoutMs: 300,
    now: clock.now,
  });
  return { server, container, controller, clock };
}

beforeEach(() => {
  document.body.innerHTML = '';
});

describe('SessionController', () => {
  it('starts a session showing exactly the 70-char prefix', async () => {
    const { controller, container } = setup();
    await controller.start();
    const shown = container.querySelector('.revealed-text')?.textContent ?? '';
    expect(shown).toBe(SENTENCE.slice(0, 70));
    expect(shown.length).toBe(70);
  });

  it('wrong guess highlights the key; correct guess reveals one character', async () => {
    const { controller, container, clock } = setup();
    await controller.start();

    await controller.handleKey('я');
    expect(container.querySelector('.key.wrong')?.textContent).toBe('Я');
    expect(container.querySelector('.revealed-text')?.textContent?.length).toBe(70);

    clock.advance(1000);
    await controller.handleKey('п');
    const shown = container.querySelector('.revealed-text')?.textContent ?? '';
    expect(shown.length).toBe(71);
    expect(shown.endsWith('П')).toBe(true);
    expect(container.querySelector('.key.wrong')).toBeNull();
  });

  it('enforces the local lockout after each guess', async () => {
    const { controller, clock } = setup();
    await controller.start();
    expect(await controller.handleKey('я')).toBe('send');
    expect(await controller.handleKey('ю')).toBe('locked');
    clock.advance(300);
    expect(await controller.handleKey('ю')).toBe('send');
  });

  it('drops repeat guesses locally without a network request', async () => {
    const { controller, clock, server } = setup();
    await controller.start();
    await controller.handleKey('я');
    clock.advance(1000);
    const before = server.requestLog.length;
    expect(await controller.handleKey('я')).toBe('ignored');
    expect(server.requestLog.length).toBe(before);
  });

  it('translates a server 429 into a lockout instead of an error', async () => {
    const { controller, clock } = setup({ minIntervalMs: 300 });
    await controller.start();
    await controller.handleKey('я');
    // local lockout expires before the server window does
    clock.advance(100);
    controller.view = { ...controller.view!, lockedUntil: 0 };
    expect(await controller.handleKey('ю')).toBe('send');
    expect(controller.view!.lockedUntil).toBeGreaterThan(clock.now());
    expect(controller.view!.wrongGuessesCurrent.has('Ю')).toBe(false);
  });

  it('plays a session to completion and offers a restart', async () => {
    const { controller, container, clock } = setup();
    await controller.start();
    for (const ch of TAIL) {
      clock.advance(1000);
      await controller.handleKey(ch === ' ' ? ' ' : ch.toLowerCase());
    }
    expect(controller.view!.status).toBe('completed');
    expect(container.querySelector('.revealed-text')?.textContent).toBe(SENTENCE);
    expect(container.querySelector('.start-again')).not.toBeNull();
    clock.advance(1000);
    expect(await controller.handleKey('а')).toBe('inactive');
  });

  it('completes when the budget is exhausted by wrong guesses', async () => {
    const { controller, clock } = setup();
    await controller.start();
    const notTail = 'ЯЮЩШЧЦХФУТ'; // none of these match their target position
    for (const ch of notTail) {
      clock.advance(1000);
      await controller.handleKey(ch);
    }
    expect(controller.view!.budgetRemaining).toBe(0);
    expect(controller.view!.status).toBe('completed');
  });

  it('never exposes unrevealed sentence text in the DOM or requests', async () => {
    const { controller, container, server, clock } = setup();
    await controller.start();
    await controller.handleKey('я');
    clock.advance(1000);
    await controller.handleKey('п');

    const revealedLen = controller.view!.revealedText.length;
    const hidden = SENTENCE.slice(revealedLen);
    expect(container.innerHTML).not.toContain(hidden);
    expect(container.innerHTML).not.toContain(hidden.slice(0, 4));
    for (const req of server.requestLog) {
      const bodyText = JSON.stringify(req.body);
      expect(bodyText).not.toContain(hidden.slice(0, 4));
    }
  });
});
