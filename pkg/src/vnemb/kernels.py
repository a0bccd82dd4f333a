"""Hot numeric kernels over CSR adjacency arrays.

Everything here is branch-heavy integer work that dominates simulation
runtime: breadth-first distances, lexicographic shortest paths, Yen-style
k-shortest loop-free path enumeration (optionally filtered by bandwidth
and latency), uniform-random embedding rollouts, and Brandes betweenness.

Kernels are compiled with numba's ``@njit`` when available. Setting the
environment variable ``VNEMB_NO_NUMBA=1`` (or a failing numba import)
selects the pure-Python fallback path: the very same functions, executed
uncompiled on the same numpy arrays. ``benchmarks/bench_kernels.py``
compares the two.

CSR convention: ``indptr`` is int64 of length n+1, ``nbr`` (int32) holds
neighbor ids sorted ascending per node, ``eid`` (int32) the undirected
edge index of each adjacency slot. Ascending neighbor order is what makes
the greedy lexicographic walk correct, so builders must sort.
"""

import os

import numpy as np

NUMBA_ENABLED = os.environ.get("VNEMB_NO_NUMBA", "").lower() not in ("1", "true", "yes")
if NUMBA_ENABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    def _jit(fn):
        return _njit(cache=True)(fn)
else:
    def _jit(fn):
        return fn

INT = np.int32


def build_csr(num_nodes, edge_u, edge_v):
    """Build (indptr, nbr, eid) from undirected edge endpoint arrays."""
    num_edges = len(edge_u)
    deg = np.zeros(num_nodes, dtype=np.int64)
    for a, b in zip(edge_u, edge_v):
        deg[a] += 1
        deg[b] += 1
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    nbr = np.empty(2 * num_edges, dtype=INT)
    eid = np.empty(2 * num_edges, dtype=INT)
    fill = indptr[:-1].copy()
    for e in range(num_edges):
        a = int(edge_u[e])
        b = int(edge_v[e])
        nbr[fill[a]] = b
        eid[fill[a]] = e
        fill[a] += 1
        nbr[fill[b]] = a
        eid[fill[b]] = e
        fill[b] += 1
    # ascending neighbor order within each node, eid follows its neighbor
    for v in range(num_nodes):
        lo, hi = indptr[v], indptr[v + 1]
        order = np.argsort(nbr[lo:hi], kind="stable")
        nbr[lo:hi] = nbr[lo:hi][order]
        eid[lo:hi] = eid[lo:hi][order]
    return indptr, nbr, eid


@_jit
def _rand_u32(state):
    # xorshift64*; state is a one-element uint64 array, never zero
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    state[0] = x
    return np.uint64(x * np.uint64(2685821657736338717)) >> np.uint64(33)


def make_rng_state(seed):
    """Seed buffer for the kernel-internal xorshift generator."""
    s = (int(seed) ^ 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    if s == 0:
        s = 0x9E3779B97F4A7C15
    return np.array([s], dtype=np.uint64)


@_jit
def _edge_between(indptr, nbr, eid, u, v):
    lo = indptr[u]
    hi = indptr[u + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        w = nbr[mid]
        if w == v:
            return eid[mid]
        if w < v:
            lo = mid + 1
        else:
            hi = mid
    return -1


@_jit
def _bfs_dist(indptr, nbr, eid, n, src, stamp, node_stamp, edge_stamp, dist, queue):
    for i in range(n):
        dist[i] = -1
    if node_stamp[src] == stamp:
        return
    dist[src] = 0
    queue[0] = src
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        for p in range(indptr[u], indptr[u + 1]):
            v = nbr[p]
            if dist[v] >= 0:
                continue
            if node_stamp[v] == stamp:
                continue
            if edge_stamp[eid[p]] == stamp:
                continue
            dist[v] = du + 1
            queue[tail] = v
            tail += 1


@_jit
def _lex_walk(indptr, nbr, eid, src, dst, stamp, node_stamp, edge_stamp, dist, out):
    # dist holds hop counts to dst under the same blocks; returns node count or 0
    if dist[src] < 0:
        return 0
    cur = src
    out[0] = cur
    length = 1
    while cur != dst:
        dcur = dist[cur]
        nxt = -1
        for p in range(indptr[cur], indptr[cur + 1]):
            v = nbr[p]
            if node_stamp[v] == stamp:
                continue
            if edge_stamp[eid[p]] == stamp:
                continue
            if dist[v] == dcur - 1:
                nxt = v  # neighbors ascend, first hit is lexicographically least
                break
        if nxt < 0:
            return 0
        cur = nxt
        out[length] = cur
        length += 1
    return length


@_jit
def _path_less(a, alen, b, blen):
    if alen != blen:
        return alen < blen
    for i in range(alen):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


@_jit
def _path_eq(a, alen, b, blen):
    if alen != blen:
        return False
    for i in range(alen):
        if a[i] != b[i]:
            return False
    return True


@_jit
def _path_ok(indptr, nbr, eid, path, plen, link_avail, demand, link_lat, lat_limit):
    total_lat = 0.0
    for i in range(plen - 1):
        e = _edge_between(indptr, nbr, eid, path[i], path[i + 1])
        if link_avail[e] < demand:
            return False
        if lat_limit >= 0.0:
            total_lat += link_lat[e]
    if lat_limit >= 0.0 and total_lat > lat_limit:
        return False
    return True


@_jit
def ksp_search(indptr, nbr, eid, n, num_edges, src, dst, k,
               first_feasible, link_avail, demand, link_lat, lat_limit,
               paths, plens):
    """Enumerate simple paths src->dst in (hop count, lexicographic) order.

    With ``first_feasible`` false: fills ``paths``/``plens`` with up to k
    paths, returns how many were found. With ``first_feasible`` true:
    stops at the first of those k paths whose every edge satisfies
    ``link_avail >= demand`` (and total latency <= lat_limit when
    lat_limit >= 0), stores it in paths[0], and returns 1; returns 0 if
    none of the first k qualifies.
    """
    maxlen = n + 1
    node_stamp = np.full(n, -1, dtype=np.int64)
    edge_stamp = np.full(num_edges, -1, dtype=np.int64)
    dist = np.empty(n, dtype=INT)
    queue = np.empty(n, dtype=INT)
    spur = np.empty(maxlen, dtype=INT)

    acc = np.empty((k, maxlen), dtype=INT)
    acc_len = np.zeros(k, dtype=np.int64)
    cap = k * n + 8
    cand = np.empty((cap, maxlen), dtype=INT)
    cand_len = np.zeros(cap, dtype=np.int64)
    cand_alive = np.zeros(cap, dtype=np.uint8)
    ncand = 0

    stamp = 0
    _bfs_dist(indptr, nbr, eid, n, dst, stamp, node_stamp, edge_stamp, dist, queue)
    length = _lex_walk(indptr, nbr, eid, src, dst, stamp, node_stamp, edge_stamp, dist, acc[0])
    if length == 0:
        return 0
    acc_len[0] = length

    i = 0
    while True:
        if first_feasible:
            if _path_ok(indptr, nbr, eid, acc[i], acc_len[i], link_avail, demand, link_lat, lat_limit):
                for t in range(acc_len[i]):
                    paths[0, t] = acc[i, t]
                plens[0] = acc_len[i]
                return 1
        else:
            for t in range(acc_len[i]):
                paths[i, t] = acc[i, t]
            plens[i] = acc_len[i]
        if i == k - 1:
            return 0 if first_feasible else k
        # spur candidates off the path just accepted
        base_len = acc_len[i]
        for j in range(base_len - 1):
            stamp += 1
            for t in range(j):
                node_stamp[acc[i, t]] = stamp
            spur_node = acc[i, j]
            for t in range(i + 1):
                if acc_len[t] > j:
                    same = True
                    for q in range(j + 1):
                        if acc[t, q] != acc[i, q]:
                            same = False
                            break
                    if same:
                        e = _edge_between(indptr, nbr, eid, acc[t, j], acc[t, j + 1])
                        if e >= 0:
                            edge_stamp[e] = stamp
            _bfs_dist(indptr, nbr, eid, n, dst, stamp, node_stamp, edge_stamp, dist, queue)
            slen = _lex_walk(indptr, nbr, eid, spur_node, dst, stamp, node_stamp, edge_stamp, dist, spur)
            if slen == 0:
                continue
            tot_len = j + slen
            if tot_len > maxlen:
                continue
            if ncand >= cap:
                continue
            row = cand[ncand]
            for t in range(j):
                row[t] = acc[i, t]
            for t in range(slen):
                row[j + t] = spur[t]
            dup = False
            for t in range(i + 1):
                if _path_eq(row, tot_len, acc[t], acc_len[t]):
                    dup = True
                    break
            if not dup:
                for t in range(ncand):
                    if cand_alive[t] == 1 and _path_eq(row, tot_len, cand[t], cand_len[t]):
                        dup = True
                        break
            if not dup:
                cand_len[ncand] = tot_len
                cand_alive[ncand] = 1
                ncand += 1
        best = -1
        for t in range(ncand):
            if cand_alive[t] == 0:
                continue
            if best < 0 or _path_less(cand[t], cand_len[t], cand[best], cand_len[best]):
                best = t
        if best < 0:
            return 0 if first_feasible else i + 1
        i += 1
        for t in range(cand_len[best]):
            acc[i, t] = cand[best, t]
        acc_len[i] = cand_len[best]
        cand_alive[best] = 0


_NO_FLOAT = np.zeros(0, dtype=np.float64)


def k_shortest_paths_csr(indptr, nbr, eid, n, num_edges, src, dst, k):
    """All of the (up to) k hop-shortest simple paths as int32 rows."""
    paths = np.full((k, n + 1), -1, dtype=INT)
    plens = np.zeros(k, dtype=np.int64)
    count = ksp_search(indptr, nbr, eid, n, num_edges, src, dst, k,
                       False, _NO_FLOAT, 0.0, _NO_FLOAT, -1.0, paths, plens)
    return [paths[i, :plens[i]].copy() for i in range(count)]


def route_csr(indptr, nbr, eid, n, num_edges, src, dst, k,
              link_avail, demand, link_lat=None, lat_limit=-1.0):
    """First bandwidth/latency-feasible path among the k hop-shortest, or None."""
    paths = np.full((1, n + 1), -1, dtype=INT)
    plens = np.zeros(1, dtype=np.int64)
    lat = link_lat if link_lat is not None else np.zeros(num_edges)
    found = ksp_search(indptr, nbr, eid, n, num_edges, src, dst, k,
                       True, link_avail, float(demand), lat, float(lat_limit),
                       paths, plens)
    if not found:
        return None
    return paths[0, :plens[0]].copy()


@_jit
def rollout_uniform(indptr, nbr, eid, n_p, num_edges, node_avail, link_avail,
                    vn_dem, vedge_a, vedge_b, vdem, vlat, order, start,
                    assign, k, link_lat, lat_aware, rng_state):
    """Complete a partial embedding with uniformly random feasible placements.

    Places order[start:] one node at a time (uniform over nodes passing
    the per-kind availability and one-per-request checks), then routes
    each virtual link to an already-placed neighbor in demand-descending
    order. Mutates node_avail / link_avail / assign, which the caller
    owns. Returns (ok, added_cost) where added_cost sums hops * demand
    over links routed here.
    """
    kinds = vn_dem.shape[0]
    n_v = order.shape[0]
    m = vdem.shape[0]
    used = np.zeros(n_p, dtype=np.uint8)
    for t in range(n_v):
        if assign[t] >= 0:
            used[assign[t]] = 1
    paths = np.full((1, n_p + 1), -1, dtype=INT)
    plens = np.zeros(1, dtype=np.int64)
    inc = np.empty(m, dtype=np.int64)
    added = 0.0
    for step in range(start, n_v):
        v = order[step]
        count = 0
        for p in range(n_p):
            if used[p] == 1:
                continue
            ok = True
            for r in range(kinds):
                if node_avail[r, p] < vn_dem[r, v]:
                    ok = False
                    break
            if ok:
                count += 1
        if count == 0:
            return False, added
        pick = int(_rand_u32(rng_state) % np.uint64(count))
        psel = -1
        seen = 0
        for p in range(n_p):
            if used[p] == 1:
                continue
            ok = True
            for r in range(kinds):
                if node_avail[r, p] < vn_dem[r, v]:
                    ok = False
                    break
            if ok:
                if seen == pick:
                    psel = p
                    break
                seen += 1
        assign[v] = psel
        used[psel] = 1
        for r in range(kinds):
            node_avail[r, psel] -= vn_dem[r, v]
        # incident links whose far end is already placed, demand-descending
        ninc = 0
        for e in range(m):
            other = -1
            if vedge_a[e] == v:
                other = vedge_b[e]
            elif vedge_b[e] == v:
                other = vedge_a[e]
            if other >= 0 and assign[other] >= 0:
                inc[ninc] = e
                ninc += 1
        for a in range(1, ninc):
            key = inc[a]
            b = a - 1
            while b >= 0 and (vdem[inc[b]] < vdem[key]
                              or (vdem[inc[b]] == vdem[key] and inc[b] > key)):
                inc[b + 1] = inc[b]
                b -= 1
            inc[b + 1] = key
        for t in range(ninc):
            e = inc[t]
            other = vedge_b[e] if vedge_a[e] == v else vedge_a[e]
            src = psel
            dst = assign[other]
            limit = vlat[e] if lat_aware else -1.0
            found = ksp_search(indptr, nbr, eid, n_p, num_edges, src, dst, k,
                               True, link_avail, vdem[e], link_lat, limit,
                               paths, plens)
            if found == 0:
                return False, added
            hops = plens[0] - 1
            for q in range(hops):
                pe = _edge_between(indptr, nbr, eid, paths[0, q], paths[0, q + 1])
                link_avail[pe] -= vdem[e]
            added += hops * vdem[e]
    return True, added


@_jit
def hop_distances(indptr, nbr, eid, n, num_edges, src):
    """Unblocked BFS hop distances from src (-1 where unreachable)."""
    node_stamp = np.full(n, -1, dtype=np.int64)
    edge_stamp = np.full(num_edges, -1, dtype=np.int64)
    dist = np.empty(n, dtype=INT)
    queue = np.empty(n, dtype=INT)
    _bfs_dist(indptr, nbr, eid, n, src, 0, node_stamp, edge_stamp, dist, queue)
    return dist


@_jit
def closeness_all(indptr, nbr, eid, n, num_edges):
    """Closeness (n-1)/sum(d) per node; assumes a connected graph."""
    out = np.zeros(n, dtype=np.float64)
    node_stamp = np.full(n, -1, dtype=np.int64)
    edge_stamp = np.full(num_edges, -1, dtype=np.int64)
    dist = np.empty(n, dtype=INT)
    queue = np.empty(n, dtype=INT)
    for s in range(n):
        _bfs_dist(indptr, nbr, eid, n, s, 0, node_stamp, edge_stamp, dist, queue)
        total = 0
        for v in range(n):
            if dist[v] > 0:
                total += dist[v]
        if total > 0:
            out[s] = (n - 1) / total
    return out


@_jit
def betweenness_all(indptr, nbr, eid, n):
    """Brandes betweenness, raw pair counts (undirected, unnormalized)."""
    bc = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=INT)
    sigma = np.zeros(n, dtype=np.float64)
    delta = np.zeros(n, dtype=np.float64)
    queue = np.empty(n, dtype=INT)
    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        queue[0] = s
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            for p in range(indptr[u], indptr[u + 1]):
                v = nbr[p]
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
                if dist[v] == du + 1:
                    sigma[v] += sigma[u]
        for qi in range(tail - 1, -1, -1):
            w = queue[qi]
            dw = dist[w]
            for p in range(indptr[w], indptr[w + 1]):
                v = nbr[p]
                if dist[v] == dw - 1 and sigma[w] > 0.0:
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
        for v in range(n):
            if v != s:
                bc[v] += delta[v]
    for v in range(n):
        bc[v] /= 2.0
    return bc


def warmup():
    """Force-compile every kernel on a toy graph (useful before timing)."""
    indptr, nbr, eid = build_csr(3, np.array([0, 1]), np.array([1, 2]))
    k_shortest_paths_csr(indptr, nbr, eid, 3, 2, 0, 2, 2)
    route_csr(indptr, nbr, eid, 3, 2, 0, 2, 2, np.ones(2), 0.5)
    closeness_all(indptr, nbr, eid, 3, 2)
    betweenness_all(indptr, nbr, eid, 3)
    hop_distances(indptr, nbr, eid, 3, 2, 0)
    rollout_uniform(indptr, nbr, eid, 3, 2, np.ones((1, 3)), np.ones(2),
                    np.zeros((1, 2)), np.array([0], dtype=INT), np.array([1], dtype=INT),
                    np.array([0.5]), np.array([-1.0]), np.array([0, 1], dtype=INT), 0,
                    np.full(2, -1, dtype=INT), 3, np.zeros(2), False, make_rng_state(1))
