import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vnemb import kernels
from vnemb.netmodel import PhysicalNetwork, VirtualNetworkRequest


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    kernels.warmup()


def make_pn(num_nodes, edges, node_cap=100.0, link_cap=100.0, kinds=("cpu",),
            latency=None):
    eu = [e[0] for e in edges]
    ev = [e[1] for e in edges]
    cap = np.full((len(kinds), num_nodes), float(node_cap)) \
        if np.isscalar(node_cap) else np.asarray(node_cap, dtype=float)
    lcap = np.full(len(edges), float(link_cap)) \
        if np.isscalar(link_cap) else np.asarray(link_cap, dtype=float)
    return PhysicalNetwork(num_nodes, eu, ev, node_kinds=kinds,
                           node_capacity=cap, link_capacity=lcap,
                           link_latency=latency)


def make_vn(num_nodes, edges, node_demand=10.0, link_demand=10.0, kinds=("cpu",),
            request_id=0, arrival=0.0, lifetime=100.0, latency_limit=None):
    dem = np.full((len(kinds), num_nodes), float(node_demand)) \
        if np.isscalar(node_demand) else np.asarray(node_demand, dtype=float)
    ldem = np.full(len(edges), float(link_demand)) \
        if np.isscalar(link_demand) else np.asarray(link_demand, dtype=float)
    return VirtualNetworkRequest(request_id, num_nodes,
                                 [e[0] for e in edges], [e[1] for e in edges],
                                 kinds, dem, ldem, arrival, lifetime,
                                 latency_limit=latency_limit)


def random_small_instance(rng, max_vn=4, max_pn=12, kinds=("cpu",),
                          latency_aware=False):
    """Random connected instance for fuzzing; demands use the default scales."""
    from vnemb.environment import Instance
    from vnemb.netmodel import generate_er_graph
    n_p = int(rng.integers(4, max_pn + 1))
    pn_edges = generate_er_graph(n_p, 0.5, rng)
    pn = make_pn(n_p, pn_edges,
                 node_cap=np.stack([rng.uniform(50, 100, n_p) for _ in kinds]),
                 link_cap=rng.uniform(50, 100, len(pn_edges)), kinds=kinds,
                 latency=rng.uniform(1, 50, len(pn_edges)) if latency_aware else None)
    n_v = int(rng.integers(2, max_vn + 1))
    vn_edges = generate_er_graph(n_v, 0.5, rng)
    vn = make_vn(n_v, vn_edges,
                 node_demand=np.stack([rng.uniform(0, 20, n_v) for _ in kinds]),
                 link_demand=rng.uniform(0, 50, len(vn_edges)), kinds=kinds,
                 request_id=int(rng.integers(1 << 30)),
                 latency_limit=np.full(len(vn_edges), 100.0) if latency_aware else None)
    return Instance(vn, pn)
