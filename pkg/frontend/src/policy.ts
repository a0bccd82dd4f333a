/** Two-layer feed-forward policy with masked softmax, hand-rolled backprop.
 *
 * Input: flattened substrate feature matrix concatenated with the current
 * virtual node's feature row. Output: one logit per physical node. Masked
 * actions get probability exactly zero (their logits never enter the
 * softmax), so the agent cannot sample them.
 */

import { Rng } from "./rng.js";

export const CHECKPOINT_VERSION = 1;

export interface Checkpoint {
  version: number;
  inputDim: number;
  hiddenDim: number;
  actionDim: number;
  w1: number[];
  b1: number[];
  w2: number[];
  b2: number[];
}

export interface ForwardCache {
  input: Float64Array;
  hidden: Float64Array; // post-tanh
  probs: Float64Array; // zero where masked
  mask: boolean[];
}

export class Policy {
  w1: Float64Array;
  b1: Float64Array;
  w2: Float64Array;
  b2: Float64Array;

  constructor(
    public inputDim: number,
    public hiddenDim: number,
    public actionDim: number,
    rng?: Rng,
  ) {
    const r = rng ?? new Rng(1);
    const scale1 = Math.sqrt(2 / (inputDim + hiddenDim));
    const scale2 = Math.sqrt(2 / (hiddenDim + actionDim));
    this.w1 = new Float64Array(inputDim * hiddenDim);
    this.b1 = new Float64Array(hiddenDim);
    this.w2 = new Float64Array(hiddenDim * actionDim);
    this.b2 = new Float64Array(actionDim);
    for (let i = 0; i < this.w1.length; i++) this.w1[i] = r.gauss() * scale1;
    for (let i = 0; i < this.w2.length; i++) this.w2[i] = r.gauss() * scale2;
  }

  forward(input: Float64Array, mask: boolean[]): ForwardCache {
    const { inputDim, hiddenDim, actionDim } = this;
    const hidden = new Float64Array(hiddenDim);
    for (let h = 0; h < hiddenDim; h++) {
      let acc = this.b1[h];
      const row = h * inputDim;
      for (let i = 0; i < inputDim; i++) acc += this.w1[row + i] * input[i];
      hidden[h] = Math.tanh(acc);
    }
    const logits = new Float64Array(actionDim);
    for (let a = 0; a < actionDim; a++) {
      let acc = this.b2[a];
      const row = a * hiddenDim;
      for (let h = 0; h < hiddenDim; h++) acc += this.w2[row + h] * hidden[h];
      logits[a] = acc;
    }
    const probs = new Float64Array(actionDim);
    let maxLogit = -Infinity;
    for (let a = 0; a < actionDim; a++) {
      if (mask[a] && logits[a] > maxLogit) maxLogit = logits[a];
    }
    let total = 0;
    for (let a = 0; a < actionDim; a++) {
      if (mask[a]) {
        probs[a] = Math.exp(logits[a] - maxLogit);
        total += probs[a];
      }
    }
    for (let a = 0; a < actionDim; a++) probs[a] = mask[a] ? probs[a] / total : 0;
    return { input, hidden, probs, mask };
  }

  sample(cache: ForwardCache, rng: Rng): number {
    const u = rng.next();
    let acc = 0;
    let last = -1;
    for (let a = 0; a < cache.probs.length; a++) {
      if (cache.probs[a] <= 0) continue;
      acc += cache.probs[a];
      last = a;
      if (u < acc) return a;
    }
    return last; // numerical slack: fall back to the final legal action
  }

  greedy(cache: ForwardCache): number {
    let best = -1;
    let bestP = -1;
    for (let a = 0; a < cache.probs.length; a++) {
      if (cache.probs[a] > bestP) {
        bestP = cache.probs[a];
        best = a;
      }
    }
    return best;
  }

  /**
   * Accumulate the policy-gradient of `weight * log pi(action)` into grads.
   * d logits = weight * (onehot(action) - probs) through masked softmax.
   */
  accumulate(
    grads: Grads,
    cache: ForwardCache,
    action: number,
    weight: number,
  ): void {
    const { inputDim, hiddenDim, actionDim } = this;
    const dLogits = new Float64Array(actionDim);
    for (let a = 0; a < actionDim; a++) {
      if (!cache.mask[a]) continue;
      dLogits[a] = weight * ((a === action ? 1 : 0) - cache.probs[a]);
    }
    const dHidden = new Float64Array(hiddenDim);
    for (let a = 0; a < actionDim; a++) {
      const g = dLogits[a];
      if (g === 0) continue;
      grads.b2[a] += g;
      const row = a * hiddenDim;
      for (let h = 0; h < hiddenDim; h++) {
        grads.w2[row + h] += g * cache.hidden[h];
        dHidden[h] += g * this.w2[row + h];
      }
    }
    for (let h = 0; h < hiddenDim; h++) {
      const g = dHidden[h] * (1 - cache.hidden[h] * cache.hidden[h]);
      if (g === 0) continue;
      grads.b1[h] += g;
      const row = h * inputDim;
      for (let i = 0; i < inputDim; i++) grads.w1[row + i] += g * cache.input[i];
    }
  }

  applyGrads(grads: Grads, lr: number, maxNorm = 5.0): void {
    let sq = 0;
    for (const arr of [grads.w1, grads.b1, grads.w2, grads.b2]) {
      for (let i = 0; i < arr.length; i++) sq += arr[i] * arr[i];
    }
    const norm = Math.sqrt(sq);
    const clip = norm > maxNorm ? maxNorm / norm : 1;
    const step = lr * clip;
    for (let i = 0; i < this.w1.length; i++) this.w1[i] += step * grads.w1[i];
    for (let i = 0; i < this.b1.length; i++) this.b1[i] += step * grads.b1[i];
    for (let i = 0; i < this.w2.length; i++) this.w2[i] += step * grads.w2[i];
    for (let i = 0; i < this.b2.length; i++) this.b2[i] += step * grads.b2[i];
  }

  zeroGrads(): Grads {
    return {
      w1: new Float64Array(this.w1.length),
      b1: new Float64Array(this.b1.length),
      w2: new Float64Array(this.w2.length),
      b2: new Float64Array(this.b2.length),
    };
  }

  logProb(cache: ForwardCache, action: number): number {
    return Math.log(cache.probs[action]);
  }

  toCheckpoint(): Checkpoint {
    return {
      version: CHECKPOINT_VERSION,
      inputDim: this.inputDim,
      hiddenDim: this.hiddenDim,
      actionDim: this.actionDim,
      w1: Array.from(this.w1),
      b1: Array.from(this.b1),
      w2: Array.from(this.w2),
      b2: Array.from(this.b2),
    };
  }

  static fromCheckpoint(ck: Checkpoint): Policy {
    if (ck.version !== CHECKPOINT_VERSION) {
      throw new Error(`unsupported checkpoint version ${ck.version}`);
    }
    const policy = new Policy(ck.inputDim, ck.hiddenDim, ck.actionDim);
    policy.w1 = Float64Array.from(ck.w1);
    policy.b1 = Float64Array.from(ck.b1);
    policy.w2 = Float64Array.from(ck.w2);
    policy.b2 = Float64Array.from(ck.b2);
    return policy;
  }
}

export interface Grads {
  w1: Float64Array;
  b1: Float64Array;
  w2: Float64Array;
  b2: Float64Array;
}
