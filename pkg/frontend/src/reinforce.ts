/** REINFORCE with a moving-average baseline over the wire protocol. */

import * as fs from "node:fs";

import { discountedReturns, flatten } from "./features.js";
import { ForwardCache, Policy } from "./policy.js";
import { EnvClient, ObsPayload } from "./protocol.js";
import { Rng } from "./rng.js";

export interface TrainOptions {
  episodes: number;
  gamma: number; // reward discount
  lr: number;
  hidden: number;
  seed: number;
  baselineBeta: number; // EMA coefficient for the return baseline
  evalWindow: number; // learning-curve bucket size
  curvePath?: string;
  checkpointPath?: string;
  episodeSeed?: (episode: number) => number; // env reset seeds
  log?: (line: string) => void;
}

export const DEFAULT_OPTIONS: TrainOptions = {
  episodes: 2000,
  gamma: 0.99,
  lr: 0.01,
  hidden: 64,
  seed: 0,
  baselineBeta: 0.95,
  evalWindow: 50,
};

interface StepRecord {
  cache: ForwardCache;
  action: number;
  reward: number;
}

export interface EpisodeResult {
  return_: number;
  steps: number;
  outcome: string;
  r2c: number;
}

export async function runEpisode(
  client: EnvClient,
  pickAction: (obs: ObsPayload) => number,
  seed?: number,
  onReward?: (reward: number) => void,
): Promise<EpisodeResult> {
  let obs: ObsPayload = await client.reset(seed);
  let total = 0;
  let steps = 0;
  let outcome = "failure";
  let r2c = 0;
  for (;;) {
    const tr = await client.step(pickAction(obs));
    onReward?.(tr.reward);
    total += tr.reward;
    steps += 1;
    if (tr.done) {
      outcome = tr.info.outcome;
      r2c = tr.info.r2c;
      break;
    }
    obs = tr.obs;
  }
  return { return_: total, steps, outcome, r2c };
}

export function randomPick(rng: Rng): (obs: ObsPayload) => number {
  return (obs) => {
    const legal: number[] = [];
    obs.mask.forEach((m, i) => m && legal.push(i));
    return legal.length ? legal[rng.int(legal.length)] : 0;
  };
}

export async function measureRandomBaseline(
  client: EnvClient,
  episodes: number,
  seed: number,
  episodeSeed?: (episode: number) => number,
): Promise<{ meanReturn: number; successRate: number }> {
  const rng = new Rng(seed ^ 0x5eed);
  const pick = randomPick(rng);
  let total = 0;
  let successes = 0;
  for (let ep = 0; ep < episodes; ep++) {
    const result = await runEpisode(client, pick, episodeSeed?.(ep));
    total += result.return_;
    if (result.outcome === "success") successes += 1;
  }
  return { meanReturn: total / episodes, successRate: successes / episodes };
}

export async function train(
  client: EnvClient,
  options: Partial<TrainOptions> = {},
): Promise<{ policy: Policy; curve: Array<{ episode: number; meanReturn: number }> }> {
  const opt = { ...DEFAULT_OPTIONS, ...options };
  const hello = client.hello;
  const pnCols = hello.feature_manifest.pn.length;
  const vnCols = hello.feature_manifest.vn.length;
  const dim = hello.pn_size * pnCols + vnCols;
  const rng = new Rng(opt.seed);
  const policy = new Policy(dim, opt.hidden, hello.pn_size, rng);
  let baseline = 0;
  let baselineReady = false;
  const curve: Array<{ episode: number; meanReturn: number }> = [];
  let windowSum = 0;
  for (let ep = 0; ep < opt.episodes; ep++) {
    const steps: Array<StepRecord | null> = [];
    const rewards: number[] = [];
    const result = await runEpisode(
      client,
      (obs) => {
        if (!obs.mask.some(Boolean)) {
          steps.push(null); // dead end; no gradient from this step
          return 0;
        }
        const cache = policy.forward(flatten(obs), obs.mask);
        const action = policy.sample(cache, rng);
        steps.push({ cache, action, reward: 0 });
        return action;
      },
      opt.episodeSeed?.(ep),
      (reward) => rewards.push(reward),
    );
    const returns = discountedReturns(rewards, opt.gamma);
    if (!baselineReady) {
      baseline = result.return_;
      baselineReady = true;
    }
    const grads = policy.zeroGrads();
    for (let t = 0; t < steps.length; t++) {
      const record = steps[t];
      if (record !== null) {
        policy.accumulate(grads, record.cache, record.action, returns[t] - baseline);
      }
    }
    policy.applyGrads(grads, opt.lr);
    baseline = opt.baselineBeta * baseline + (1 - opt.baselineBeta) * result.return_;
    windowSum += result.return_;
    if ((ep + 1) % opt.evalWindow === 0) {
      const meanReturn = windowSum / opt.evalWindow;
      curve.push({ episode: ep + 1, meanReturn });
      windowSum = 0;
      opt.log?.(`episode ${ep + 1}: mean return ${meanReturn.toFixed(4)}`);
      if (!Number.isFinite(meanReturn)) {
        throw new Error("training diverged (non-finite return)");
      }
    }
  }
  if (opt.curvePath) {
    const lines = ["episode,mean_return"];
    for (const point of curve) {
      lines.push(`${point.episode},${point.meanReturn.toFixed(6)}`);
    }
    fs.writeFileSync(opt.curvePath, lines.join("\n") + "\n");
  }
  if (opt.checkpointPath) {
    fs.writeFileSync(opt.checkpointPath, JSON.stringify(policy.toCheckpoint()));
  }
  return { policy, curve };
}

export async function evaluate(
  client: EnvClient,
  policy: Policy,
  episodes: number,
  episodeSeed?: (episode: number) => number,
): Promise<{ meanReturn: number; successRate: number; meanR2c: number }> {
  let total = 0;
  let successes = 0;
  let r2cSum = 0;
  for (let ep = 0; ep < episodes; ep++) {
    const result = await runEpisode(
      client,
      (obs) => policy.greedy(policy.forward(flatten(obs), obs.mask)),
      episodeSeed?.(ep),
    );
    total += result.return_;
    if (result.outcome === "success") {
      successes += 1;
      r2cSum += result.r2c;
    }
  }
  return {
    meanReturn: total / episodes,
    successRate: successes / episodes,
    meanR2c: successes ? r2cSum / successes : 0,
  };
}
