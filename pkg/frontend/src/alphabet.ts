export const UKRAINIAN_LETTERS = 'АБВГҐДЕЄЖЗИІЇЙКЛМНОПРСТУФХЦЧШЩЬЮЯ';
export const WHITESPACE = ' ';
export const ALPHABET: readonly string[] = [...UKRAINIAN_LETTERS, WHITESPACE];

const SET = new Set(ALPHABET);

/** Map a keyboard key to a guessable symbol, or null if outside the alphabet. */
export function normalizeKey(key: string): string | null {
  if (key === ' ' || key === 'Spacebar') return WHITESPACE;
  const upper = key.toUpperCase();
  return SET.has(upper) ? upper : null;
}
