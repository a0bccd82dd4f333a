"""Topology metrics for ranking and feature engineering.

All metrics depend only on the (immutable) topology, so results are cached
on the graph's ``_topo_cache`` dict, which physical-network snapshots share.
"""

import numpy as np

from . import kernels


def _cache(graph):
    cache = getattr(graph, "_topo_cache", None)
    if cache is None:
        cache = {}
        try:
            graph._topo_cache = cache
        except AttributeError:
            pass
    return cache


def degrees(graph):
    return np.diff(graph.indptr).astype(np.float64)


def degree_centrality(graph):
    """Degree divided by the maximum degree."""
    cache = _cache(graph)
    if "degree_c" not in cache:
        d = degrees(graph)
        cache["degree_c"] = d / d.max() if d.max() > 0 else d
    return cache["degree_c"]


def closeness_centrality(graph):
    """(n-1) / sum of hop distances; connected graphs only."""
    cache = _cache(graph)
    if "closeness" not in cache:
        cache["closeness"] = kernels.closeness_all(
            graph.indptr, graph.nbr, graph.eid, graph.num_nodes,
            max(graph.num_links, 1))
    return cache["closeness"]


def betweenness_raw(graph):
    """Brandes betweenness as raw pair counts (undirected)."""
    cache = _cache(graph)
    if "betweenness" not in cache:
        cache["betweenness"] = kernels.betweenness_all(
            graph.indptr, graph.nbr, graph.eid, graph.num_nodes)
    return cache["betweenness"]


def betweenness_normalized(graph):
    """Raw betweenness scaled by the pair count (n-1)(n-2)/2, like networkx."""
    n = graph.num_nodes
    scale = (n - 1) * (n - 2) / 2.0
    raw = betweenness_raw(graph)
    return raw / scale if scale > 0 else raw.copy()


def eigenvector_centrality(graph):
    """Principal adjacency eigenvector (nonnegative, unit max norm)."""
    cache = _cache(graph)
    if "eigenvector" not in cache:
        n = graph.num_nodes
        adj = np.zeros((n, n))
        for u in range(n):
            for p in range(graph.indptr[u], graph.indptr[u + 1]):
                adj[u, graph.nbr[p]] = 1.0
        vals, vecs = np.linalg.eigh(adj)
        vec = np.abs(vecs[:, int(np.argmax(vals))])
        cache["eigenvector"] = vec / vec.max() if vec.max() > 0 else vec
    return cache["eigenvector"]


def normalized_by_max(values):
    m = float(np.max(values))
    return values / m if m > 0 else np.zeros_like(values)
