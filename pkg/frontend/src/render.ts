import { ALPHABET, WHITESPACE } from './alphabet';
import type { UiSessionView } from './state';

/** Render the session into a container. Only server-revealed characters
 * ever reach the DOM. */
export function renderSession(container: HTMLElement, view: UiSessionView, now: number): void {
  container.textContent = '';

  const text = document.createElement('div');
  text.className = 'revealed-text';
  text.textContent = view.revealedText;
  container.appendChild(text);

  const progress = document.createElement('div');
  progress.className = 'progress';
  progress.textContent =
    `${view.revealedText.length} / ${view.sentenceLength} символів · ` +
    `залишилось спроб: ${view.budgetRemaining}`;
  container.appendChild(progress);

  if (view.status !== 'active') {
    const summary = document.createElement('div');
    summary.className = 'summary';
    summary.textContent =
      view.status === 'completed'
        ? `Сесію завершено. Використано спроб: ${view.guessesUsed}, вгадано: ${view.correctGuesses}.`
        : `Сесію покинуто. Вгадано символів: ${view.correctGuesses}.`;
    container.appendChild(summary);

    const again = document.createElement('button');
    again.className = 'start-again';
    again.textContent = 'Почати нову сесію';
    container.appendChild(again);
    return;
  }

  const wrongCount = document.createElement('div');
  wrongCount.className = 'wrong-count';
  wrongCount.textContent = `Невдалих спроб на цій позиції: ${view.wrongGuessesCurrent.size}`;
  container.appendChild(wrongCount);

  const keyboard = document.createElement('div');
  keyboard.className = 'keyboard';
  for (const symbol of ALPHABET) {
    const key = document.createElement('button');
    key.className = 'key';
    key.dataset.symbol = symbol;
    key.textContent = symbol === WHITESPACE ? '␣' : symbol;
    if (view.wrongGuessesCurrent.has(symbol)) {
      key.classList.add('wrong');
      key.disabled = true;
    }
    keyboard.appendChild(key);
  }
  container.appendChild(keyboard);

  if (now < view.lockedUntil) {
    const lock = document.createElement('div');
    lock.className = 'lockout';
    lock.textContent = `Зачекайте ${Math.ceil((view.lockedUntil - now) / 100) / 10} с`;
    container.appendChild(lock);
  }
}
