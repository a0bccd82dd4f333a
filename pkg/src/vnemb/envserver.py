"""JSON-lines protocol for driving episodes from external agents.

One message per line over a TCP stream or stdio. The server opens with a
hello carrying the schema version, substrate size and feature manifest;
clients then alternate reset/step. Malformed messages get an error reply
and the session survives; a client hello with the wrong schema_version is
rejected and the connection closed.
"""

import json
import socketserver
import sys
from dataclasses import replace

from .config import build_physical_network, generate_request_sequence
from .environment import (DEFAULT_FEATURES, Instance, RewardSpec, env_reset,
                          env_step)
from .errors import ProtocolError, StateError

PROTOCOL_VERSION = 1


class EnvSession:
    """Single-session protocol state machine; transport-agnostic."""

    def __init__(self, cfg, reward_spec=None, feature_spec=DEFAULT_FEATURES):
        self.cfg = cfg
        self.reward_spec = reward_spec or RewardSpec()
        self.feature_spec = feature_spec
        self.pn = build_physical_network(cfg)
        self.state = None
        self.episode = 0

    def hello(self):
        probe_cfg = replace(self.cfg, vn_count=1, seed=self.cfg.seed)
        vn = generate_request_sequence(probe_cfg)[0]
        state, obs = env_reset(Instance(vn, self.pn.snapshot(), self.cfg.k_paths),
                               self.reward_spec, self.feature_spec)
        return {"type": "hello", "schema_version": PROTOCOL_VERSION,
                "pn_size": self.pn.num_nodes,
                "feature_manifest": obs.manifest,
                "reward": {"kind": self.reward_spec.kind,
                           "value": self.reward_spec.value,
                           "failure_penalty": self.reward_spec.penalty(
                               state.instance.vn.num_nodes)}}

    def _obs_payload(self, obs):
        return {"pn_features": obs.pn_features.tolist(),
                "vn_features": obs.vn_features.tolist(),
                "current_vnode": int(obs.current_vnode),
                "mask": [bool(x) for x in obs.mask]}

    def handle(self, message):
        """One request message -> one reply dict."""
        if not isinstance(message, dict) or "type" not in message:
            return _error("bad_message", "messages are objects with a 'type' field")
        kind = message["type"]
        if kind == "hello":
            version = message.get("schema_version")
            if version != PROTOCOL_VERSION:
                reply = _error("version_mismatch",
                               f"server speaks schema_version {PROTOCOL_VERSION}")
                reply["close"] = True
                return reply
            return self.hello()
        if kind == "reset":
            seed = message.get("seed")
            if seed is None:
                seed = self.cfg.seed + self.episode
            try:
                seed = int(seed)
            except (TypeError, ValueError):
                return _error("bad_message", "reset seed must be an integer")
            episode_cfg = replace(self.cfg, vn_count=1, seed=seed)
            vn = generate_request_sequence(episode_cfg)[0]
            instance = Instance(vn, self.pn.snapshot(), self.cfg.k_paths)
            self.state, obs = env_reset(instance, self.reward_spec, self.feature_spec)
            self.episode += 1
            return {"type": "obs", "episode": self.episode, **self._obs_payload(obs)}
        if kind == "step":
            if self.state is None:
                return _error("no_episode", "send reset before step")
            action = message.get("action")
            if not isinstance(action, int) or isinstance(action, bool):
                return _error("bad_message", "step needs an integer 'action'")
            try:
                self.state, obs, reward, done, info = env_step(self.state, action)
            except ProtocolError as exc:
                return _error(exc.code, exc.detail)
            except StateError as exc:
                return _error("episode_done", str(exc))
            return {"type": "transition", "obs": self._obs_payload(obs),
                    "reward": float(reward), "done": bool(done),
                    "info": {"outcome": info["outcome"],
                             "r2c": float(info["r2c"]),
                             "failure": info["failure"]}}
        return _error("bad_message", f"unknown message type {kind!r}")


def _error(code, detail):
    return {"type": "error", "code": code, "detail": detail}


def _session_loop(session, rfile, wfile):
    def send(payload):
        wfile.write((json.dumps(payload) + "\n").encode())
        wfile.flush()

    send(session.hello())
    for raw in rfile:
        line = raw.decode(errors="replace").strip()
        if not line:
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            send(_error("bad_json", "line is not valid JSON"))
            continue
        reply = session.handle(message)
        close = reply.pop("close", False)
        send(reply)
        if close:
            break


def serve_environment(cfg, host="127.0.0.1", port=0, reward_spec=None,
                      feature_spec=DEFAULT_FEATURES, ready_callback=None):
    """Blocking TCP server; each connection is an independent session."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            session = EnvSession(cfg, reward_spec, feature_spec)
            try:
                _session_loop(session, self.rfile, self.wfile)
            except (BrokenPipeError, ConnectionResetError):
                pass

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    with Server((host, port), Handler) as server:
        if ready_callback is not None:
            ready_callback(server.server_address)
        server.serve_forever()


def serve_stdio(cfg, reward_spec=None, feature_spec=DEFAULT_FEATURES):
    """Single session over stdin/stdout (one JSON message per line)."""
    session = EnvSession(cfg, reward_spec, feature_spec)
    _session_loop(session, sys.stdin.buffer, sys.stdout.buffer)
