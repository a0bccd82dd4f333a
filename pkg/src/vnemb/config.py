"""Simulation configuration: schema, TOML I/O, presets, request generation.

The on-disk format is one TOML file with three attribute blocks per
network side (node_attrs_setting, link_attrs_setting, graph_attrs_setting),
a [simulation] block for the arrival process, and optional per-solver
parameter blocks. ``schema_version`` guards compatibility.
"""

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .netmodel import (ResourceSpec, VirtualNetworkRequest, apply_resource_specs,
                       generate_er_graph, generate_waxman_topology,
                       load_topology_file)
from .rng import substream

SCHEMA_VERSION = 1

# expected link count of the 100-node preset sits in [450, 550] for this beta
WX100_ALPHA = 0.5
WX100_BETA = 0.2


@dataclass
class SimulationConfig:
    seed: int = 0
    vn_count: int = 1000
    arrival_rate: float = 0.14
    lifetime_mean: float = 500.0
    time_limit: float = 0.0  # per-request solver wall budget; 0 = unlimited
    pn_source: str = "waxman"  # "waxman" | "file"
    pn_nodes: int = 100
    waxman_alpha: float = WX100_ALPHA
    waxman_beta: float = WX100_BETA
    pn_path: str = ""
    vn_size_low: int = 2
    vn_size_high: int = 10
    vn_edge_prob: float = 0.5
    pn_node_specs: list = field(default_factory=lambda: [
        ResourceSpec("cpu", "node", "uniform", low=50, high=100)])
    pn_link_spec: ResourceSpec = field(default_factory=lambda: ResourceSpec(
        "bandwidth", "link", "uniform", low=50, high=100))
    vn_node_specs: list = field(default_factory=lambda: [
        ResourceSpec("cpu", "node", "uniform", low=0, high=20)])
    vn_link_spec: ResourceSpec = field(default_factory=lambda: ResourceSpec(
        "bandwidth", "link", "uniform", low=0, high=50))
    heterogeneous: bool = False
    latency_aware: bool = False
    energy_tracking: bool = False
    pn_latency_spec: ResourceSpec = field(default_factory=lambda: ResourceSpec(
        "latency", "link", "uniform", low=1, high=50))
    vn_latency_limit: ResourceSpec = field(default_factory=lambda: ResourceSpec(
        "latency", "link", "constant", value=100.0))
    energy_idle: float = 150.0
    energy_peak: float = 300.0
    k_paths: int = 10
    topology_name: str = "wx100"
    solver_params: dict = field(default_factory=dict)

    def validate(self):
        if self.vn_count <= 0:
            raise ConfigError("vn_count must be positive", field="vn_count")
        if self.arrival_rate <= 0:
            raise ConfigError("arrival_rate must be positive", field="arrival_rate")
        if self.lifetime_mean <= 0:
            raise ConfigError("lifetime_mean must be positive", field="lifetime_mean")
        if not (2 <= self.vn_size_low <= self.vn_size_high):
            raise ConfigError("need 2 <= size_low <= size_high", field="vn_size_low")
        if not (0 < self.vn_edge_prob <= 1):
            raise ConfigError("edge_prob must lie in (0, 1]", field="vn_edge_prob")
        if self.time_limit < 0:
            raise ConfigError("time_limit must be >= 0", field="time_limit")
        if self.k_paths < 1:
            raise ConfigError("k_paths must be >= 1", field="k_paths")
        if self.pn_source == "waxman":
            if self.pn_nodes < 2:
                raise ConfigError("waxman topology needs nodes >= 2", field="pn_nodes")
            if not (0 < self.waxman_alpha <= 1 and 0 < self.waxman_beta <= 1):
                raise ConfigError("waxman alpha/beta must lie in (0, 1]",
                                  field="waxman_alpha")
        elif self.pn_source == "file":
            if not self.pn_path:
                raise ConfigError("pn_source 'file' needs a path", field="pn_path")
        else:
            raise ConfigError(f"unknown pn_source {self.pn_source!r}", field="pn_source")
        for spec in (*self.pn_node_specs, self.pn_link_spec,
                     *self.vn_node_specs, self.vn_link_spec):
            spec.validate()
        if not self.pn_node_specs or not self.vn_node_specs:
            raise ConfigError("need at least one node-level resource",
                              field="node_attrs_setting")
        pn_kinds = [s.name for s in self.pn_node_specs]
        vn_kinds = [s.name for s in self.vn_node_specs]
        if pn_kinds != vn_kinds:
            raise ConfigError("PN and VN node resource kinds must match",
                              field="node_attrs_setting")
        if len(pn_kinds) > 1 and not self.heterogeneous:
            raise ConfigError("multiple node kinds require the heterogeneous flag",
                              field="heterogeneous")
        return self

    def to_dict(self):
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        return d

    def fingerprint(self):
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def _spec_from_table(entry, level, where):
    name = entry.get("name")
    if not name:
        raise ConfigError(f"{where}: attribute entry needs a name", field=where)
    dist = entry.get("distribution", "uniform")
    return ResourceSpec(name, level, dist,
                        low=float(entry.get("low", 0.0)),
                        high=float(entry.get("high", 0.0)),
                        mean=float(entry.get("mean", 0.0)),
                        value=float(entry.get("value", 0.0)))


def _split_latency(specs):
    plain = [s for s in specs if s.name != "latency"]
    latency = [s for s in specs if s.name == "latency"]
    return plain, (latency[0] if latency else None)


def config_from_dict(data, path="<config>"):
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{path}: schema_version {version!r} not supported "
                          f"(expected {SCHEMA_VERSION})", field="schema_version")
    cfg = SimulationConfig()
    sim = data.get("simulation", {})
    cfg.seed = int(sim.get("seed", cfg.seed))
    cfg.vn_count = int(sim.get("vn_count", cfg.vn_count))
    cfg.arrival_rate = float(sim.get("arrival_rate", cfg.arrival_rate))
    cfg.lifetime_mean = float(sim.get("lifetime_mean", cfg.lifetime_mean))
    cfg.time_limit = float(sim.get("time_limit", cfg.time_limit))
    cfg.k_paths = int(sim.get("k_paths", cfg.k_paths))
    scen = data.get("scenario", {})
    cfg.heterogeneous = bool(scen.get("heterogeneous", False))
    cfg.latency_aware = bool(scen.get("latency_aware", False))
    cfg.energy_tracking = bool(scen.get("energy_tracking", False))
    pn = data.get("pn", {})
    cfg.pn_source = pn.get("source", cfg.pn_source)
    cfg.pn_nodes = int(pn.get("nodes", cfg.pn_nodes))
    cfg.waxman_alpha = float(pn.get("waxman_alpha", cfg.waxman_alpha))
    cfg.waxman_beta = float(pn.get("waxman_beta", cfg.waxman_beta))
    cfg.pn_path = pn.get("path", cfg.pn_path)
    cfg.topology_name = pn.get("name", cfg.pn_source)
    if "node_attrs_setting" in pn:
        cfg.pn_node_specs = [_spec_from_table(e, "node", "pn.node_attrs_setting")
                             for e in pn["node_attrs_setting"]]
    if "link_attrs_setting" in pn:
        specs = [_spec_from_table(e, "link", "pn.link_attrs_setting")
                 for e in pn["link_attrs_setting"]]
        specs, lat = _split_latency(specs)
        if not specs:
            raise ConfigError("pn.link_attrs_setting needs a bandwidth entry",
                              field="pn.link_attrs_setting")
        cfg.pn_link_spec = specs[0]
        if lat is not None:
            cfg.pn_latency_spec = lat
    graph_attrs = pn.get("graph_attrs_setting", {})
    cfg.energy_idle = float(graph_attrs.get("energy_idle", cfg.energy_idle))
    cfg.energy_peak = float(graph_attrs.get("energy_peak", cfg.energy_peak))
    vn = data.get("vn", {})
    cfg.vn_size_low = int(vn.get("size_low", cfg.vn_size_low))
    cfg.vn_size_high = int(vn.get("size_high", cfg.vn_size_high))
    cfg.vn_edge_prob = float(vn.get("edge_prob", cfg.vn_edge_prob))
    if "node_attrs_setting" in vn:
        cfg.vn_node_specs = [_spec_from_table(e, "node", "vn.node_attrs_setting")
                             for e in vn["node_attrs_setting"]]
    if "link_attrs_setting" in vn:
        specs = [_spec_from_table(e, "link", "vn.link_attrs_setting")
                 for e in vn["link_attrs_setting"]]
        specs, lat = _split_latency(specs)
        if not specs:
            raise ConfigError("vn.link_attrs_setting needs a bandwidth entry",
                              field="vn.link_attrs_setting")
        cfg.vn_link_spec = specs[0]
        if lat is not None:
            cfg.vn_latency_limit = lat
    cfg.solver_params = dict(data.get("solvers", {}))
    return cfg.validate()


def load_config(path):
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: not valid TOML: {exc}") from exc
    return config_from_dict(data, path=str(path))


def preset_config(topology="wx100", eta=None, seed=0, **overrides):
    """Named experiment presets; eta defaults to the topology's usual rate."""
    cfg = SimulationConfig(seed=seed)
    if topology in ("wx100", "wx100_hi"):
        cfg.pn_source = "waxman"
        cfg.pn_nodes = 100
        cfg.waxman_alpha = WX100_ALPHA
        cfg.waxman_beta = WX100_BETA
        cfg.topology_name = "wx100"
        cfg.arrival_rate = 0.16 if topology == "wx100_hi" else 0.14
    elif topology.startswith("waxman-"):
        cfg.pn_source = "waxman"
        cfg.pn_nodes = int(topology.split("-", 1)[1])
        cfg.topology_name = topology
        cfg.arrival_rate = 0.14
    else:
        cfg.pn_source = "file"
        cfg.pn_path = topology
        cfg.topology_name = topology.rsplit("/", 1)[-1].split(".")[0]
    if eta is not None:
        cfg.arrival_rate = float(eta)
    for key, value in overrides.items():
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config field {key!r}", field=key)
        setattr(cfg, key, value)
    if cfg.heterogeneous and len(cfg.pn_node_specs) == 1:
        cfg.pn_node_specs = [
            ResourceSpec("cpu", "node", "uniform", low=50, high=100),
            ResourceSpec("gpu", "node", "uniform", low=50, high=100),
            ResourceSpec("ram", "node", "uniform", low=50, high=100)]
        cfg.vn_node_specs = [
            ResourceSpec("cpu", "node", "uniform", low=0, high=20),
            ResourceSpec("gpu", "node", "uniform", low=0, high=20),
            ResourceSpec("ram", "node", "uniform", low=0, high=20)]
    return cfg.validate()


def build_physical_network(cfg):
    """Materialize the substrate described by the config (deterministic)."""
    if cfg.pn_source == "waxman":
        skeleton = generate_waxman_topology(cfg.pn_nodes, cfg.waxman_alpha,
                                            cfg.waxman_beta, cfg.seed)
    else:
        skeleton = load_topology_file(cfg.pn_path)
    latency_spec = cfg.pn_latency_spec if cfg.latency_aware else None
    pn = apply_resource_specs(skeleton, [*cfg.pn_node_specs, cfg.pn_link_spec],
                              cfg.seed, latency_spec=latency_spec)
    if cfg.energy_tracking:
        pn.energy_idle = np.full(pn.num_nodes, cfg.energy_idle)
        pn.energy_peak = np.full(pn.num_nodes, cfg.energy_peak)
    return pn


def _phase_overrides(phases, index):
    if not phases:
        return None
    current = None
    for start, overrides in phases:
        if index >= start:
            current = overrides
    return current


def generate_request_sequence(cfg, phases=None):
    """Draw the full ordered arrival sequence for one simulation run.

    ``phases`` optionally lists (start_index, overrides) pairs whose
    overrides (size_low/size_high/node_high/link_high) replace the
    matching defaults from that request index onward.
    """
    cfg.validate()
    eta = cfg.arrival_rate
    gaps = substream(cfg.seed, "arrivals", 0).exponential(1.0 / eta, cfg.vn_count)
    arrivals = np.cumsum(gaps)
    lifetimes = substream(cfg.seed, "lifetimes", 0).exponential(
        cfg.lifetime_mean, cfg.vn_count)
    requests = []
    kinds = tuple(s.name for s in cfg.vn_node_specs)
    for i in range(cfg.vn_count):
        over = _phase_overrides(phases, i) or {}
        size_low = int(over.get("size_low", cfg.vn_size_low))
        size_high = int(over.get("size_high", cfg.vn_size_high))
        node_specs = cfg.vn_node_specs
        link_spec = cfg.vn_link_spec
        if "node_high" in over:
            node_specs = [ResourceSpec(s.name, "node", "uniform", low=s.low,
                                       high=float(over["node_high"]))
                          for s in node_specs]
        if "link_high" in over:
            link_spec = ResourceSpec(link_spec.name, "link", "uniform",
                                     low=link_spec.low,
                                     high=float(over["link_high"]))
        rng_topo = substream(cfg.seed, "topology", 1 + i)
        size = int(rng_topo.integers(size_low, size_high + 1))
        edges = generate_er_graph(size, cfg.vn_edge_prob, rng_topo)
        rng_dem = substream(cfg.seed, "demands", 1 + i)
        node_demand = np.stack([s.sample(rng_dem, size) for s in node_specs])
        link_demand = link_spec.sample(rng_dem, len(edges))
        latency_limit = None
        if cfg.latency_aware:
            latency_limit = cfg.vn_latency_limit.sample(rng_dem, len(edges))
        requests.append(VirtualNetworkRequest(
            i, size, [e[0] for e in edges], [e[1] for e in edges], kinds,
            node_demand, link_demand, float(arrivals[i]), float(lifetimes[i]),
            latency_limit=latency_limit))
    return requests
