/** Agent command line: train against a running server, or evaluate a checkpoint. */

import * as fs from "node:fs";
import { parseArgs } from "node:util";

import { Policy } from "./policy.js";
import { EnvClient } from "./protocol.js";
import { evaluate, measureRandomBaseline, train } from "./reinforce.js";

function usage(): never {
  console.error(
    "usage: node dist/cli.js train --host H --port P [--episodes N] [--lr X]\n" +
      "           [--gamma G] [--hidden H] [--seed S] [--checkpoint out.json]\n" +
      "           [--curve curve.csv] [--baseline-episodes N]\n" +
      "       node dist/cli.js eval --host H --port P --checkpoint ck.json\n" +
      "           [--episodes N]",
  );
  process.exit(2);
}

async function main(): Promise<void> {
  const [command, ...rest] = process.argv.slice(2);
  if (command !== "train" && command !== "eval") usage();
  const { values } = parseArgs({
    args: rest,
    options: {
      host: { type: "string", default: "127.0.0.1" },
      port: { type: "string" },
      episodes: { type: "string", default: command === "train" ? "2000" : "200" },
      lr: { type: "string", default: "0.01" },
      gamma: { type: "string", default: "0.99" },
      hidden: { type: "string", default: "64" },
      seed: { type: "string", default: "0" },
      checkpoint: { type: "string" },
      curve: { type: "string" },
      "baseline-episodes": { type: "string", default: "0" },
    },
  });
  if (!values.port) usage();
  const client = new EnvClient();
  await client.connect(values.host!, Number(values.port));
  const episodes = Number(values.episodes);
  if (command === "train") {
    const baselineEpisodes = Number(values["baseline-episodes"]);
    if (baselineEpisodes > 0) {
      const random = await measureRandomBaseline(
        client,
        baselineEpisodes,
        Number(values.seed),
        (ep) => ep,
      );
      console.log(
        `random policy: mean return ${random.meanReturn.toFixed(4)}, ` +
          `success rate ${random.successRate.toFixed(3)}`,
      );
    }
    const { curve } = await train(client, {
      episodes,
      lr: Number(values.lr),
      gamma: Number(values.gamma),
      hidden: Number(values.hidden),
      seed: Number(values.seed),
      checkpointPath: values.checkpoint,
      curvePath: values.curve,
      log: (line) => console.log(line),
    });
    const last = curve[curve.length - 1];
    console.log(`final window mean return ${last?.meanReturn.toFixed(4)}`);
  } else {
    if (!values.checkpoint) usage();
    const policy = Policy.fromCheckpoint(
      JSON.parse(fs.readFileSync(values.checkpoint, "utf8")),
    );
    const report = await evaluate(client, policy, episodes, (ep) => 1_000_000 + ep);
    console.log(JSON.stringify(report, null, 2));
  }
  client.close();
}

main().catch((err) => {
  console.error(err instanceof Error ? err.message : String(err));
  process.exit(3);
});
