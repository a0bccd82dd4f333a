"""Wire protocol: handshake, episodes, malformed traffic, liveness."""

import json
import socket
import threading

import numpy as np
import pytest

from vnemb.config import preset_config
from vnemb.envserver import EnvSession, serve_environment
from vnemb.environment import RewardSpec


def tiny_cfg():
    return preset_config("waxman-10", vn_count=1, vn_size_low=2, vn_size_high=3,
                         seed=7)


class TestSessionUnit:
    def test_hello_shape(self):
        session = EnvSession(tiny_cfg())
        hello = session.hello()
        assert hello["type"] == "hello"
        assert hello["schema_version"] == 1
        assert hello["pn_size"] == 10
        assert set(hello["feature_manifest"]) >= {"pn", "vn"}

    def test_reset_then_step_roundtrip(self):
        session = EnvSession(tiny_cfg())
        obs = session.handle({"type": "reset", "seed": 1})
        assert obs["type"] == "obs"
        assert len(obs["mask"]) == 10
        assert len(obs["pn_features"]) == 10
        action = obs["mask"].index(True)
        reply = session.handle({"type": "step", "action": action})
        assert reply["type"] == "transition"
        assert set(reply) >= {"obs", "reward", "done", "info"}
        assert reply["info"]["outcome"] in ("in_progress", "success", "failure")

    def test_reset_same_seed_identical(self):
        session = EnvSession(tiny_cfg())
        a = session.handle({"type": "reset", "seed": 5})
        b = session.handle({"type": "reset", "seed": 5})
        assert a["pn_features"] == b["pn_features"]
        assert a["vn_features"] == b["vn_features"]
        assert a["mask"] == b["mask"]

    def test_malformed_messages_keep_session(self):
        session = EnvSession(tiny_cfg())
        assert session.handle({"no_type": 1})["type"] == "error"
        assert session.handle({"type": "warp"})["code"] == "bad_message"
        assert session.handle({"type": "step", "action": "x"})["type"] == "error"
        assert session.handle({"type": "step", "action": 0})["code"] == "no_episode"
        obs = session.handle({"type": "reset", "seed": 0})
        assert obs["type"] == "obs"  # session still alive

    def test_version_mismatch_rejected(self):
        session = EnvSession(tiny_cfg())
        reply = session.handle({"type": "hello", "schema_version": 99})
        assert reply["code"] == "version_mismatch"
        assert reply.get("close") is True

    def test_step_after_done_is_error_not_fatal(self):
        session = EnvSession(tiny_cfg())
        obs = session.handle({"type": "reset", "seed": 2})
        done = False
        for _ in range(8):
            legal = [i for i, m in enumerate(obs_mask(session, obs)) if m]
            action = legal[0] if legal else 0
            reply = session.handle({"type": "step", "action": action})
            if reply["type"] == "error":
                break
            done = reply["done"]
            obs = reply["obs"]
            if done:
                break
        assert done
        reply = session.handle({"type": "step", "action": 0})
        assert reply["type"] == "error"
        assert session.handle({"type": "reset", "seed": 3})["type"] == "obs"


def obs_mask(session, obs):
    return obs["mask"]


class _Client:
    def __init__(self, address):
        self.sock = socket.create_connection(address, timeout=10)
        self.rfile = self.sock.makefile("rb")

    def send(self, payload):
        self.sock.sendall((json.dumps(payload) + "\n").encode())

    def recv(self):
        line = self.rfile.readline()
        if not line:
            raise ConnectionError("server closed")
        return json.loads(line)

    def close(self):
        self.sock.close()


@pytest.fixture(scope="module")
def server_address():
    cfg = tiny_cfg()
    box = {}
    ready = threading.Event()

    def ready_cb(addr):
        box["addr"] = addr
        ready.set()

    thread = threading.Thread(
        target=serve_environment,
        args=(cfg,), kwargs={"port": 0, "reward_spec": RewardSpec("fir", 0.1),
                             "ready_callback": ready_cb},
        daemon=True)
    thread.start()
    assert ready.wait(10)
    return box["addr"]


class TestTcpServer:
    def test_handshake_on_connect(self, server_address):
        client = _Client(server_address)
        hello = client.recv()
        assert hello["type"] == "hello" and hello["schema_version"] == 1
        client.close()

    def test_bad_json_gets_error_reply(self, server_address):
        client = _Client(server_address)
        client.recv()
        client.sock.sendall(b"{nope\n")
        assert client.recv()["code"] == "bad_json"
        client.send({"type": "reset", "seed": 1})
        assert client.recv()["type"] == "obs"
        client.close()

    def test_random_policy_hundred_episodes_terminate(self, server_address):
        rng = np.random.default_rng(0)
        client = _Client(server_address)
        client.recv()
        returns = []
        for episode in range(100):
            client.send({"type": "reset", "seed": episode})
            obs = client.recv()
            assert obs["type"] == "obs"
            total = 0.0
            for _step in range(12):
                legal = [i for i, m in enumerate(obs["mask"]) if m]
                action = int(rng.choice(legal)) if legal else 0
                client.send({"type": "step", "action": action})
                reply = client.recv()
                assert reply["type"] == "transition"
                total += reply["reward"]
                if reply["done"]:
                    break
                obs = reply["obs"]
            else:
                pytest.fail("episode did not terminate")
            returns.append(total)
        assert np.isfinite(returns).all()
        assert len(returns) == 100
        client.close()

    def test_concurrent_sessions_are_independent(self, server_address):
        a = _Client(server_address)
        b = _Client(server_address)
        a.recv()
        b.recv()
        a.send({"type": "reset", "seed": 11})
        b.send({"type": "reset", "seed": 12})
        oa = a.recv()
        ob = b.recv()
        assert oa["type"] == "obs" and ob["type"] == "obs"
        assert oa["vn_features"] != ob["vn_features"] or oa["mask"] != ob["mask"]
        a.close()
        b.close()
