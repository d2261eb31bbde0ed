/**
 * Pairwise softmax cross-entropy over two document scores:
 *   loss = -log( exp(sPos) / (exp(sPos) + exp(sNeg)) ) = softplus(-(sPos - sNeg))
 * computed in the numerically stable branch form.
 */

export function pairwiseLoss(sPos: number, sNeg: number): number {
  const z = sPos - sNeg;
  return z >= 0 ? Math.log1p(Math.exp(-z)) : -z + Math.log1p(Math.exp(z));
}

/** d loss / d z where z = sPos - sNeg; equals -sigmoid(-z). */
export function pairwiseLossGrad(sPos: number, sNeg: number): number {
  const z = sPos - sNeg;
  return -sigmoid(-z);
}

export function sigmoid(x: number): number {
  return x >= 0 ? 1 / (1 + Math.exp(-x)) : Math.exp(x) / (1 + Math.exp(x));
}
