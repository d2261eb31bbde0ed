/**
 * Non-contextual impact encoder: a token embedding table feeding a
 * two-layer MLP with a rectifier between the layers and after the output,
 * so every token maps to one non-negative scalar impact. Identical tokens
 * always receive identical scores.
 *
 * A document's score for a query is the sum of impacts over the unique
 * terms shared by the query and the (length-truncated) document, each
 * unique term counted once.
 */

import { gaussian, mulberry32 } from "./rng.js";
import { pairwiseLoss, pairwiseLossGrad } from "./loss.js";
import { uniqueTokens } from "./tokenize.js";

export interface EncoderConfig {
  embedDim: number;
  hiddenDim: number;
  maxLen: number;
  seed: number;
}

export const DEFAULT_CONFIG: EncoderConfig = {
  embedDim: 64,
  hiddenDim: 64,
  maxLen: 160,
  seed: 7,
};

export interface ModelFile {
  config: EncoderConfig;
  vocab: string[];
  params: number[];
}

export class ImpactEncoder {
  readonly config: EncoderConfig;
  readonly vocab: Map<string, number>;
  readonly tokens: string[];
  readonly params: Float64Array;
  // parameter block offsets into `params`
  readonly offEmb = 0;
  readonly offW1: number;
  readonly offB1: number;
  readonly offW2: number;
  readonly offB2: number;

  constructor(tokens: string[], config: EncoderConfig, params?: Float64Array) {
    this.config = config;
    this.tokens = tokens;
    this.vocab = new Map(tokens.map((t, i) => [t, i]));
    const { embedDim: E, hiddenDim: H } = config;
    const V = tokens.length;
    this.offW1 = V * E;
    this.offB1 = this.offW1 + E * H;
    this.offW2 = this.offB1 + H;
    this.offB2 = this.offW2 + H;
    const size = this.offB2 + 1;
    if (params) {
      if (params.length !== size) {
        throw new Error(`parameter vector has ${params.length} entries, expected ${size}`);
      }
      this.params = params;
    } else {
      this.params = this.initialize(size);
    }
  }

  /**
   * Small random weights; the output bias starts positive so the final
   * rectifier is not born dead (a zero output has zero gradient).
   */
  private initialize(size: number): Float64Array {
    const { embedDim: E, hiddenDim: H, seed } = this.config;
    const normal = gaussian(mulberry32(seed));
    const params = new Float64Array(size);
    for (let i = 0; i < this.offW1; i++) params[i] = normal() * 0.1;
    for (let i = this.offW1; i < this.offB1; i++) params[i] = normal() / Math.sqrt(E);
    for (let i = this.offB1; i < this.offW2; i++) params[i] = 0.01;
    for (let i = this.offW2; i < this.offB2; i++) params[i] = normal() / Math.sqrt(H);
    params[this.offB2] = 0.1;
    return params;
  }

  get parameterCount(): number {
    return this.params.length;
  }

  /** Impact of a single token; unknown tokens score 0. */
  impact(token: string): number {
    const id = this.vocab.get(token);
    if (id === undefined) return 0;
    return this.forwardId(id).f;
  }

  private forwardId(id: number) {
    const { embedDim: E, hiddenDim: H } = this.config;
    const p = this.params;
    const embOff = id * E;
    const a = new Float64Array(H);
    for (let j = 0; j < H; j++) {
      let sum = p[this.offB1 + j];
      for (let i = 0; i < E; i++) {
        sum += p[embOff + i] * p[this.offW1 + i * H + j];
      }
      a[j] = sum;
    }
    let u = p[this.offB2];
    for (let j = 0; j < H; j++) {
      if (a[j] > 0) u += a[j] * p[this.offW2 + j];
    }
    return { a, u, f: u > 0 ? u : 0 };
  }

  /**
   * Unique terms scored for a query-document pair: the document is
   * truncated to maxLen tokens first, then intersected with the unique
   * query terms.
   */
  matchedTerms(queryTokens: string[], docTokens: string[]): string[] {
    const docSet = new Set(docTokens.slice(0, this.config.maxLen));
    return uniqueTokens(queryTokens).filter((t) => docSet.has(t));
  }

  /** Query-document score: sum of matched unique-term impacts. */
  score(queryTokens: string[], docTokens: string[]): number {
    let sum = 0;
    for (const term of this.matchedTerms(queryTokens, docTokens)) {
      sum += this.impact(term);
    }
    return sum;
  }

  lossForTriple(query: string[], pos: string[], neg: string[]): number {
    return pairwiseLoss(this.score(query, pos), this.score(query, neg));
  }

  /**
   * Forward + backward for one triple; gradients are accumulated into
   * `grads` (same layout as params). Returns the triple's loss.
   */
  accumulateGradients(query: string[], pos: string[], neg: string[],
                      grads: Float64Array): number {
    const posTerms = this.matchedTerms(query, pos);
    const negTerms = this.matchedTerms(query, neg);
    let sPos = 0;
    let sNeg = 0;
    for (const t of posTerms) sPos += this.impact(t);
    for (const t of negTerms) sNeg += this.impact(t);

    const dz = pairwiseLossGrad(sPos, sNeg);
    // a term shared by both sides receives the net coefficient
    const coef = new Map<string, number>();
    for (const t of posTerms) coef.set(t, (coef.get(t) ?? 0) + dz);
    for (const t of negTerms) coef.set(t, (coef.get(t) ?? 0) - dz);

    for (const [term, c] of coef) {
      if (c !== 0) this.backwardToken(term, c, grads);
    }
    return pairwiseLoss(sPos, sNeg);
  }

  /** Backprop c = dLoss/dImpact(token) into all parameter blocks. */
  private backwardToken(token: string, c: number, grads: Float64Array): void {
    const id = this.vocab.get(token);
    if (id === undefined) return;
    const { embedDim: E, hiddenDim: H } = this.config;
    const p = this.params;
    const { a, u } = this.forwardId(id);
    if (u <= 0) return; // output rectifier is inactive: no gradient flows

    grads[this.offB2] += c;
    const embOff = id * E;
    for (let j = 0; j < H; j++) {
      const hj = a[j] > 0 ? a[j] : 0;
      grads[this.offW2 + j] += c * hj;
      if (a[j] <= 0) continue;
      const da = c * p[this.offW2 + j];
      grads[this.offB1 + j] += da;
      for (let i = 0; i < E; i++) {
        grads[this.offW1 + i * H + j] += da * p[embOff + i];
        grads[embOff + i] += da * p[this.offW1 + i * H + j];
      }
    }
  }

  toFile(): ModelFile {
    return {
      config: this.config,
      vocab: this.tokens,
      params: Array.from(this.params),
    };
  }

  static fromFile(file: ModelFile): ImpactEncoder {
    return new ImpactEncoder(file.vocab, file.config, Float64Array.from(file.params));
  }
}
