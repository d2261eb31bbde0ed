/**
 * Tokenizer matching the retrieval engine's defaults (lowercase, split on
 * anything that is not a letter or digit), so the term space the trainer
 * learns over is the same one the engine indexes.
 */

const WORD = /[\p{L}\p{N}]+/gu;

export function tokenize(text: string): string[] {
  return text.toLowerCase().match(WORD) ?? [];
}

/** Unique tokens in first-occurrence order. */
export function uniqueTokens(tokens: string[]): string[] {
  return [...new Set(tokens)];
}
