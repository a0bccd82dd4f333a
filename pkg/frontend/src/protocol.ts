/** JSON-lines episode protocol client (one message per line over TCP). */

import * as net from "node:net";

export const SCHEMA_VERSION = 1;

export interface HelloMsg {
  type: "hello";
  schema_version: number;
  pn_size: number;
  feature_manifest: { pn: string[]; vn: string[]; normalization?: string };
  reward: { kind: string; value: number; failure_penalty: number };
}

export interface ObsPayload {
  pn_features: number[][];
  vn_features: number[][];
  current_vnode: number;
  mask: boolean[];
}

export interface ObsMsg extends ObsPayload {
  type: "obs";
  episode: number;
}

export interface TransitionMsg {
  type: "transition";
  obs: ObsPayload;
  reward: number;
  done: boolean;
  info: { outcome: string; r2c: number; failure: string };
}

export interface ErrorMsg {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMsg = HelloMsg | ObsMsg | TransitionMsg | ErrorMsg;

export class ProtocolError extends Error {
  constructor(public code: string, detail: string) {
    super(`${code}: ${detail}`);
  }
}

/** Strict request/reply client; the server sends hello on connect. */
export class EnvClient {
  private socket!: net.Socket;
  private buffer = "";
  private pending: Array<{
    resolve: (msg: ServerMsg) => void;
    reject: (err: Error) => void;
  }> = [];
  hello!: HelloMsg;

  async connect(host: string, port: number): Promise<HelloMsg> {
    this.socket = net.createConnection({ host, port });
    this.socket.setNoDelay(true);
    this.socket.on("data", (chunk: Buffer) => this.onData(chunk));
    this.socket.on("error", (err) => this.failAll(err));
    this.socket.on("close", () =>
      this.failAll(new Error("connection closed")),
    );
    await new Promise<void>((resolve, reject) => {
      this.socket.once("connect", () => resolve());
      this.socket.once("error", reject);
    });
    const first = await this.expectMessage();
    if (first.type !== "hello") {
      throw new ProtocolError("bad_handshake", `expected hello, got ${first.type}`);
    }
    if (first.schema_version !== SCHEMA_VERSION) {
      throw new ProtocolError(
        "version_mismatch",
        `server speaks ${first.schema_version}, client ${SCHEMA_VERSION}`,
      );
    }
    this.hello = first;
    return first;
  }

  private onData(chunk: Buffer): void {
    this.buffer += chunk.toString("utf8");
    let idx: number;
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx).trim();
      this.buffer = this.buffer.slice(idx + 1);
      if (!line) continue;
      const waiter = this.pending.shift();
      if (!waiter) continue; // unsolicited; protocol is strict request/reply
      try {
        waiter.resolve(JSON.parse(line) as ServerMsg);
      } catch (err) {
        waiter.reject(err as Error);
      }
    }
  }

  private failAll(err: Error): void {
    while (this.pending.length) this.pending.shift()!.reject(err);
  }

  private expectMessage(): Promise<ServerMsg> {
    return new Promise((resolve, reject) =>
      this.pending.push({ resolve, reject }),
    );
  }

  private async request(payload: unknown): Promise<ServerMsg> {
    const reply = this.expectMessage();
    this.socket.write(JSON.stringify(payload) + "\n");
    return reply;
  }

  async reset(seed?: number): Promise<ObsMsg> {
    const msg = await this.request(
      seed === undefined ? { type: "reset" } : { type: "reset", seed },
    );
    if (msg.type === "error") throw new ProtocolError(msg.code, msg.detail);
    if (msg.type !== "obs") {
      throw new ProtocolError("bad_reply", `expected obs, got ${msg.type}`);
    }
    return msg;
  }

  async step(action: number): Promise<TransitionMsg> {
    const msg = await this.request({ type: "step", action });
    if (msg.type === "error") throw new ProtocolError(msg.code, msg.detail);
    if (msg.type !== "transition") {
      throw new ProtocolError("bad_reply", `expected transition, got ${msg.type}`);
    }
    return msg;
  }

  /** Raw line for protocol-conformance tests (malformed traffic etc.). */
  async sendRaw(line: string): Promise<ServerMsg> {
    const reply = this.expectMessage();
    this.socket.write(line.endsWith("\n") ? line : line + "\n");
    return reply;
  }

  close(): void {
    this.socket.destroy();
  }
}
