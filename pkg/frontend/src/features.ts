/** Observation flattening: substrate matrix + current virtual node row.
 *
 * The substrate matrix has a fixed shape per server, and the current
 * node's feature row has a fixed width, so the policy input dimension is
 * constant even though request sizes vary.
 */

import { ObsPayload } from "./protocol.js";

export function inputDim(pnSize: number, pnCols: number, vnCols: number): number {
  return pnSize * pnCols + vnCols;
}

export function flatten(obs: ObsPayload): Float64Array {
  const pnRows = obs.pn_features.length;
  const pnCols = pnRows > 0 ? obs.pn_features[0].length : 0;
  const vnCols = obs.vn_features.length > 0 ? obs.vn_features[0].length : 0;
  const out = new Float64Array(pnRows * pnCols + vnCols);
  let k = 0;
  for (const row of obs.pn_features) {
    for (const x of row) out[k++] = x;
  }
  const current = obs.vn_features[obs.current_vnode] ?? new Array(vnCols).fill(0);
  for (const x of current) out[k++] = x;
  return out;
}

/** Discounted returns G_t = r_t + gamma * G_{t+1}. */
export function discountedReturns(rewards: number[], gamma: number): number[] {
  const out = new Array<number>(rewards.length);
  let acc = 0;
  for (let t = rewards.length - 1; t >= 0; t--) {
    acc = rewards[t] + gamma * acc;
    out[t] = acc;
  }
  return out;
}
