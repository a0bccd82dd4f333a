"""Attributed network graphs and stochastic request generation.

The substrate (physical network) and requests (virtual networks) are both
flat numpy structures: per-kind resource matrices for nodes, parallel
arrays for undirected links. The physical network additionally carries a
CSR adjacency view consumed by the routing kernels, plus an allocation
ledger so that releases restore availabilities bit-exactly.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, FormatError, StateError
from .rng import substream

DEFAULT_BANDWIDTH = "bandwidth"


@dataclass(frozen=True)
class ResourceSpec:
    """One resource kind and the distribution its capacities/demands follow."""

    name: str
    level: str  # "node" | "link"
    distribution: str  # "uniform" | "exponential" | "constant"
    low: float = 0.0
    high: float = 0.0
    mean: float = 0.0
    value: float = 0.0

    def validate(self):
        if self.level not in ("node", "link"):
            raise ConfigError(f"resource {self.name!r}: level must be node or link", field="level")
        if self.distribution == "uniform":
            if not self.low <= self.high:
                raise ConfigError(f"resource {self.name!r}: need low <= high", field="low")
        elif self.distribution == "exponential":
            if not self.mean > 0:
                raise ConfigError(f"resource {self.name!r}: need mean > 0", field="mean")
        elif self.distribution == "constant":
            pass
        else:
            raise ConfigError(f"resource {self.name!r}: unknown distribution "
                              f"{self.distribution!r}", field="distribution")

    def sample(self, rng, size):
        if self.distribution == "uniform":
            return rng.uniform(self.low, self.high, size)
        if self.distribution == "exponential":
            return rng.exponential(self.mean, size)
        return np.full(size, float(self.value))


class PhysicalNetwork:
    """Substrate graph with per-node resource kinds and per-link bandwidth.

    ``node_capacity`` / ``node_available`` are (kinds, nodes) float64;
    links are parallel arrays over undirected edges with endpoints
    ``edge_u < edge_v``. Mutation happens only through ``allocate_*`` /
    ``release_*`` (see embedding module) on the single owning simulation.
    """

    def __init__(self, num_nodes, edge_u, edge_v, node_kinds=(),
                 node_capacity=None, link_capacity=None, link_latency=None,
                 coords=None, energy_idle=None, energy_peak=None):
        edge_u = np.asarray(edge_u, dtype=np.int32)
        edge_v = np.asarray(edge_v, dtype=np.int32)
        if len(edge_u) != len(edge_v):
            raise ConfigError("edge endpoint arrays differ in length")
        swap = edge_u > edge_v
        edge_u2 = np.where(swap, edge_v, edge_u)
        edge_v2 = np.where(swap, edge_u, edge_v)
        if np.any(edge_u2 == edge_v2):
            raise ConfigError("self-loops are not allowed")
        pairs = set(zip(edge_u2.tolist(), edge_v2.tolist()))
        if len(pairs) != len(edge_u2):
            raise ConfigError("parallel links are not allowed")
        self.num_nodes = int(num_nodes)
        self.edge_u = edge_u2
        self.edge_v = edge_v2
        self.num_links = len(edge_u2)
        self.node_kinds = tuple(node_kinds)
        r = len(self.node_kinds)
        self.node_capacity = (np.zeros((r, self.num_nodes)) if node_capacity is None
                              else np.asarray(node_capacity, dtype=np.float64))
        self.node_available = self.node_capacity.copy()
        self.link_capacity = (np.zeros(self.num_links) if link_capacity is None
                              else np.asarray(link_capacity, dtype=np.float64))
        self.link_available = self.link_capacity.copy()
        self.link_latency = (None if link_latency is None
                             else np.asarray(link_latency, dtype=np.float64))
        self.coords = coords
        self.energy_idle = energy_idle
        self.energy_peak = energy_peak
        self.indptr, self.nbr, self.eid = kernels.build_csr(self.num_nodes, edge_u2, edge_v2)
        # per-node / per-link contribution maps, keyed by request id; the
        # authoritative availabilities are recomputed from these so that a
        # full release returns capacities bit-exactly (see embedding.allocate)
        self._node_holds = [dict() for _ in range(self.num_nodes)]
        self._link_holds = [dict() for _ in range(self.num_links)]
        self._topo_cache = {}  # shared by snapshots; topology never mutates

    def kind_index(self, name):
        try:
            return self.node_kinds.index(name)
        except ValueError:
            raise ConfigError(f"unknown node resource kind {name!r}") from None

    def edge_between(self, u, v):
        e = kernels._edge_between(self.indptr, self.nbr, self.eid, int(u), int(v))
        return None if e < 0 else int(e)

    def degrees(self):
        return np.diff(self.indptr)

    def adjacent_links(self, node):
        lo, hi = self.indptr[node], self.indptr[node + 1]
        return self.eid[lo:hi]

    def is_connected(self):
        if self.num_nodes == 0:
            return False
        dist = kernels.hop_distances(self.indptr, self.nbr, self.eid,
                                     self.num_nodes, self.num_links, 0)
        return bool(np.all(dist >= 0))

    def snapshot(self):
        """Deep copy of mutable state; topology arrays are shared read-only."""
        pn = object.__new__(PhysicalNetwork)
        pn.num_nodes = self.num_nodes
        pn.edge_u = self.edge_u
        pn.edge_v = self.edge_v
        pn.num_links = self.num_links
        pn.node_kinds = self.node_kinds
        pn.node_capacity = self.node_capacity
        pn.node_available = self.node_available.copy()
        pn.link_capacity = self.link_capacity
        pn.link_available = self.link_available.copy()
        pn.link_latency = self.link_latency
        pn.coords = self.coords
        pn.energy_idle = self.energy_idle
        pn.energy_peak = self.energy_peak
        pn.indptr, pn.nbr, pn.eid = self.indptr, self.nbr, self.eid
        pn._node_holds = [dict(d) for d in self._node_holds]
        pn._link_holds = [dict(d) for d in self._link_holds]
        pn._topo_cache = self._topo_cache
        return pn

    def _refresh_node(self, node):
        holds = self._node_holds[node]
        for r in range(len(self.node_kinds)):
            total = 0.0
            for key in sorted(holds):
                total += holds[key][r]
            self.node_available[r, node] = self.node_capacity[r, node] - total
        if not holds:
            self.node_available[:, node] = self.node_capacity[:, node]

    def _refresh_link(self, link):
        holds = self._link_holds[link]
        total = 0.0
        for key in sorted(holds):
            total += holds[key]
        self.link_available[link] = self.link_capacity[link] - total

    def hold_node(self, node, request_id, demands):
        if request_id in self._node_holds[node]:
            raise StateError(f"request {request_id} already holds node {node}")
        self._node_holds[node][request_id] = np.asarray(demands, dtype=np.float64)
        self._refresh_node(node)

    def hold_link(self, link, request_id, demand):
        holds = self._link_holds[link]
        holds[request_id] = holds.get(request_id, 0.0) + float(demand)
        self._refresh_link(link)

    def drop_request(self, request_id, nodes, links):
        for node in nodes:
            if request_id not in self._node_holds[node]:
                raise StateError(f"request {request_id} holds nothing on node {node}")
            del self._node_holds[node][request_id]
            self._refresh_node(node)
        for link in links:
            if request_id not in self._link_holds[link]:
                raise StateError(f"request {request_id} holds nothing on link {link}")
            del self._link_holds[link][request_id]
            self._refresh_link(link)

    def utilization(self, kind=0):
        cap = self.node_capacity[kind]
        with np.errstate(invalid="ignore", divide="ignore"):
            u = np.where(cap > 0, (cap - self.node_available[kind]) / cap, 0.0)
        return u


class VirtualNetworkRequest:
    """One service request: a small connected graph of demands with timing."""

    def __init__(self, request_id, num_nodes, edge_a, edge_b, node_kinds,
                 node_demand, link_demand, arrival_time, lifetime,
                 latency_limit=None):
        if num_nodes < 2:
            raise ConfigError("virtual networks need at least 2 nodes")
        if arrival_time < 0 or lifetime <= 0:
            raise ConfigError("need arrival_time >= 0 and lifetime > 0")
        self.id = int(request_id)
        self.num_nodes = int(num_nodes)
        self.edge_a = np.asarray(edge_a, dtype=np.int32)
        self.edge_b = np.asarray(edge_b, dtype=np.int32)
        if np.any(self.edge_a == self.edge_b):
            raise ConfigError("virtual links may not be self-loops")
        pairs = {(min(a, b), max(a, b)) for a, b in zip(self.edge_a.tolist(),
                                                        self.edge_b.tolist())}
        if len(pairs) != len(self.edge_a):
            raise ConfigError("parallel virtual links are not allowed")
        self.num_links = len(self.edge_a)
        self.node_kinds = tuple(node_kinds)
        self.node_demand = np.asarray(node_demand, dtype=np.float64)
        self.link_demand = np.asarray(link_demand, dtype=np.float64)
        if np.any(self.node_demand < 0) or np.any(self.link_demand < 0):
            raise ConfigError("demands must be nonnegative")
        self.arrival_time = float(arrival_time)
        self.lifetime = float(lifetime)
        self.latency_limit = (None if latency_limit is None
                              else np.asarray(latency_limit, dtype=np.float64))
        self.indptr, self.nbr, self.eid = kernels.build_csr(
            self.num_nodes, self.edge_a, self.edge_b)

    @property
    def departure_time(self):
        return self.arrival_time + self.lifetime

    def total_demand(self):
        """Per-node demand summed over kinds; drives decision ordering."""
        return self.node_demand.sum(axis=0)

    def revenue(self):
        return float(self.node_demand.sum() + self.link_demand.sum())

    def is_connected(self):
        dist = kernels.hop_distances(self.indptr, self.nbr, self.eid,
                                     self.num_nodes, max(self.num_links, 1), 0)
        return bool(np.all(dist >= 0))

    def decision_order(self):
        """Virtual nodes by decreasing total demand, ties by id."""
        total = self.total_demand()
        return np.lexsort((np.arange(self.num_nodes), -total)).astype(np.int32)


def _connect_components(num_nodes, edges, coords=None):
    """Join connected components with edges between nearest (or lowest-id) pairs."""
    parent = list(range(num_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    comps = {}
    for v in range(num_nodes):
        comps.setdefault(find(v), []).append(v)
    groups = sorted(comps.values(), key=lambda g: g[0])
    while len(groups) > 1:
        base = groups[0]
        best = None
        for gi in range(1, len(groups)):
            for a in base:
                for b in groups[gi]:
                    if coords is not None:
                        d = float(np.hypot(*(coords[a] - coords[b])))
                        key = (d, a, b)
                    else:
                        key = (0.0, a, b)
                    if best is None or key < best[0]:
                        best = (key, gi, a, b)
        _, gi, a, b = best
        edges.append((min(a, b), max(a, b)))
        base.extend(groups[gi])
        base.sort()
        del groups[gi]
    return edges


def generate_waxman_topology(n, alpha, beta, seed, max_retries=100):
    """Random geometric topology with distance-decaying edge probability.

    Nodes are placed uniformly on the unit square; pair (u, v) gets an
    edge with probability alpha * exp(-d(u, v) / (beta * L)), L being the
    largest pairwise distance of the sample. Disconnected draws are
    resampled with an incremented sub-seed; after ``max_retries`` the
    components of the last draw are joined via nearest node pairs.
    """
    if n < 2:
        raise ConfigError("waxman topology needs n >= 2", field="n")
    if not (0 < alpha <= 1 and 0 < beta <= 1):
        raise ConfigError("waxman parameters must lie in (0, 1]", field="alpha")
    last = None
    for attempt in range(max_retries):
        rng = substream(seed, "topology", attempt)
        coords = rng.random((n, 2))
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        scale = dist.max()
        prob = alpha * np.exp(-dist / (beta * scale))
        draw = rng.random((n, n))
        iu = np.triu_indices(n, k=1)
        take = draw[iu] < prob[iu]
        edges = list(zip(iu[0][take].tolist(), iu[1][take].tolist()))
        pn = PhysicalNetwork(n, [e[0] for e in edges], [e[1] for e in edges]) \
            if edges else None
        if pn is not None and pn.is_connected():
            pn.coords = coords
            return pn
        last = (coords, edges)
    coords, edges = last
    edges = _connect_components(n, edges, coords)
    pn = PhysicalNetwork(n, [e[0] for e in edges], [e[1] for e in edges])
    pn.coords = coords
    return pn


def generate_er_graph(n, prob, rng, max_retries=100):
    """Connected Erdos-Renyi G(n, p); resample, then repair by joining components."""
    edges = []
    for _ in range(max_retries):
        draw = rng.random((n, n))
        iu = np.triu_indices(n, k=1)
        take = draw[iu] < prob
        edges = list(zip(iu[0][take].tolist(), iu[1][take].tolist()))
        if not edges:
            continue
        adj = [[] for _ in range(n)]
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = [False] * n
        stack = [0]
        seen[0] = True
        cnt = 1
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    cnt += 1
                    stack.append(w)
        if cnt == n:
            return edges
    return _connect_components(n, edges)


def load_topology_file(path):
    """Read a GraphML topology into a PhysicalNetwork skeleton.

    Node ids are relabeled to 0..n-1 in sorted original order. Numeric
    node/link attributes survive in ``preset_node_attrs`` /
    ``preset_link_attrs`` and take precedence in apply_resource_specs.
    """
    import networkx as nx

    try:
        graph = nx.read_graphml(path)
    except Exception as exc:
        raise FormatError(f"could not parse {path!r} as GraphML: {exc}") from exc
    if graph.number_of_nodes() == 0:
        raise FormatError(f"{path!r} contains no nodes")
    graph = nx.Graph(graph)  # collapse directedness / multi-edges
    order = sorted(graph.nodes(), key=str)
    index = {v: i for i, v in enumerate(order)}
    edges = []
    for a, b in graph.edges():
        if index[a] == index[b]:
            continue
        edges.append((min(index[a], index[b]), max(index[a], index[b])))
    pn = PhysicalNetwork(len(order), [e[0] for e in edges], [e[1] for e in edges])
    if not pn.is_connected():
        raise FormatError(f"{path!r}: topology is not connected")
    node_attrs = {}
    for key in {k for v in order for k in graph.nodes[v]}:
        try:
            vals = np.array([float(graph.nodes[v].get(key, np.nan)) for v in order])
        except (TypeError, ValueError):
            continue
        if not np.any(np.isnan(vals)):
            node_attrs[key] = vals
    link_attrs = {}
    edge_pos = {e: i for i, e in enumerate(edges)}
    for key in {k for _, _, d in graph.edges(data=True) for k in d}:
        vals = np.full(len(edges), np.nan)
        ok = True
        for a, b, d in graph.edges(data=True):
            e = (min(index[a], index[b]), max(index[a], index[b]))
            if e not in edge_pos:
                continue
            try:
                vals[edge_pos[e]] = float(d.get(key, np.nan))
            except (TypeError, ValueError):
                ok = False
                break
        if ok and not np.any(np.isnan(vals)):
            link_attrs[key] = vals
    pn.preset_node_attrs = node_attrs
    pn.preset_link_attrs = link_attrs
    return pn


def apply_resource_specs(skeleton, specs, seed, latency_spec=None):
    """Fill node/link capacities per the given specs; available := capacity.

    File-provided attribute arrays matching a spec name win over sampling.
    """
    if not specs:
        raise ConfigError("at least one resource spec is required", field="resource_specs")
    node_specs = [s for s in specs if s.level == "node"]
    link_specs = [s for s in specs if s.level == "link"]
    for s in specs:
        s.validate()
    if not node_specs or not link_specs:
        raise ConfigError("need at least one node-level and one link-level resource",
                          field="resource_specs")
    if len(link_specs) > 1:
        raise ConfigError("links carry a single bandwidth resource", field="resource_specs")
    rng = substream(seed, "demands", 0)
    preset_nodes = getattr(skeleton, "preset_node_attrs", {})
    preset_links = getattr(skeleton, "preset_link_attrs", {})
    kinds = tuple(s.name for s in node_specs)
    cap = np.zeros((len(kinds), skeleton.num_nodes))
    for i, s in enumerate(node_specs):
        if s.name in preset_nodes:
            cap[i] = preset_nodes[s.name]
        else:
            cap[i] = s.sample(rng, skeleton.num_nodes)
    ls = link_specs[0]
    if ls.name in preset_links:
        link_cap = preset_links[ls.name]
    else:
        link_cap = ls.sample(rng, skeleton.num_links)
    latency = None
    if latency_spec is not None:
        if "latency" in preset_links:
            latency = preset_links["latency"]
        else:
            latency = latency_spec.sample(rng, skeleton.num_links)
    pn = PhysicalNetwork(skeleton.num_nodes, skeleton.edge_u, skeleton.edge_v,
                         node_kinds=kinds, node_capacity=cap,
                         link_capacity=link_cap, link_latency=latency,
                         coords=getattr(skeleton, "coords", None))
    return pn
