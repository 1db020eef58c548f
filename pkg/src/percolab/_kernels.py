"""Numba kernels for the hot paths: union-find labeling, cluster BFS,
heat-bath random-cluster chains, Wilson walks, and trifurcation counting.

All stochastic kernels draw from an internal xoshiro256** generator seeded via
splitmix64 expansion of a 64-bit seed, so results are bit-identical across
platforms and independent of NumPy's global RNG state.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, inline="always")
def _splitmix64(x):
    x = x + U64(0x9E3779B97F4A7C15)
    z = x
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return x, z ^ (z >> U64(31))


@njit(cache=True)
def _rng_init(seed):
    s = np.empty(4, dtype=np.uint64)
    x = U64(seed)
    for i in range(4):
        x, z = _splitmix64(x)
        s[i] = z
    return s


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (U64(64) - k))


@njit(cache=True, inline="always")
def _rng_next(s):
    # xoshiro256**
    result = _rotl(s[1] * U64(5), U64(7)) * U64(9)
    t = s[1] << U64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], U64(45))
    return result


@njit(cache=True, inline="always")
def _rng_unit(s):
    return float(_rng_next(s) >> U64(11)) * _INV53


@njit(cache=True)
def rng_stream(seed, count):
    """Deterministic uniform doubles (test hook for pinning the generator)."""
    s = _rng_init(seed)
    out = np.empty(count, dtype=np.float64)
    for i in range(count):
        out[i] = _rng_unit(s)
    return out


# ---------------------------------------------------------------------------
# Union-find labeling.


@njit(cache=True, inline="always")
def _find(parent, v):
    root = v
    while parent[root] != root:
        root = parent[root]
    while parent[v] != root:
        nxt = parent[v]
        parent[v] = root
        v = nxt
    return root


@njit(cache=True, inline="always")
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    # Union by size; ties keep the smaller root index.
    if size[ra] < size[rb] or (size[ra] == size[rb] and rb < ra):
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]


@njit(cache=True)
def uf_label(nv, eu, ev, open_bits):
    """Dense cluster labels per vertex, numbered by first appearance in vertex
    order (so labels are independent of union internals)."""
    parent = np.arange(nv, dtype=np.int32)
    size = np.ones(nv, dtype=np.int32)
    for i in range(eu.size):
        if open_bits[i]:
            _union(parent, size, eu[i], ev[i])
    labels = np.empty(nv, dtype=np.int32)
    dense = np.full(nv, -1, dtype=np.int32)
    k = 0
    for v in range(nv):
        r = _find(parent, v)
        if dense[r] < 0:
            dense[r] = k
            k += 1
        labels[v] = dense[r]
    return labels, k


@njit(cache=True)
def cluster_bfs(indptr, adj_v, adj_e, open_bits, active, start, visited, queue):
    """Mark the cluster of ``start`` in the subgraph of open edges with
    ``active[edge] != 0``.  ``visited`` must be zeroed by the caller; returns
    the cluster size."""
    visited[start] = 1
    queue[0] = start
    head = 0
    tail = 1
    while head < tail:
        v = queue[head]
        head += 1
        for j in range(indptr[v], indptr[v + 1]):
            e = adj_e[j]
            if open_bits[e] == 0 or active[e] == 0:
                continue
            w = adj_v[j]
            if visited[w] == 0:
                visited[w] = 1
                queue[tail] = w
                tail += 1
    return tail


# ---------------------------------------------------------------------------
# Heat-bath random-cluster chain (general regions).


@njit(cache=True, inline="always")
def _connected_off(e0, u0, v0, indptr, adj_v, adj_e, open_bits, mark, qa, qb, stamp):
    """Are u0, v0 joined by open edges other than e0?  Bidirectional BFS whose
    cost is bounded by the smaller component."""
    tag_a = stamp
    tag_b = stamp + 1
    mark[u0] = tag_a
    mark[v0] = tag_b
    qa[0] = u0
    qb[0] = v0
    head_a = 0
    tail_a = 1
    head_b = 0
    tail_b = 1
    while True:
        if tail_a - head_a <= tail_b - head_b:
            if head_a == tail_a:
                return False
            v = qa[head_a]
            head_a += 1
            for j in range(indptr[v], indptr[v + 1]):
                e = adj_e[j]
                if e == e0 or open_bits[e] == 0:
                    continue
                w = adj_v[j]
                m = mark[w]
                if m == tag_b:
                    return True
                if m != tag_a:
                    mark[w] = tag_a
                    qa[tail_a] = w
                    tail_a += 1
        else:
            if head_b == tail_b:
                return False
            v = qb[head_b]
            head_b += 1
            for j in range(indptr[v], indptr[v + 1]):
                e = adj_e[j]
                if e == e0 or open_bits[e] == 0:
                    continue
                w = adj_v[j]
                m = mark[w]
                if m == tag_a:
                    return True
                if m != tag_b:
                    mark[w] = tag_b
                    qb[tail_b] = w
                    tail_b += 1


@njit(cache=True)
def rc_chain(nv, eu, ev, n_pseudo, indptr, adj_v, adj_e, p, q, sweeps, init_open, seed):
    """Single-edge heat-bath dynamics for the random-cluster model.

    Sweeps the ``eu.size`` real edges in canonical order; the conditional law
    of an edge is p if its endpoints are connected off the edge, else
    p/(p+(1-p)q), with the connectivity query exact.  Wired boundaries are
    expressed by the caller as ``n_pseudo`` permanently-open pseudo edges
    (ids past the real block) in the adjacency, joining boundary vertices to
    a virtual vertex.  One uniform is consumed per edge visit regardless of
    branch, so trajectories are reproducible.
    """
    m = eu.size
    open_bits = np.empty(m + n_pseudo, dtype=np.uint8)
    for i in range(m):
        open_bits[i] = init_open
    for i in range(m, m + n_pseudo):
        open_bits[i] = 1
    s = _rng_init(seed)
    a = p
    b = p / (p + (1.0 - p) * q)
    lo = min(a, b)
    hi = max(a, b)
    mark = np.zeros(nv, dtype=np.int64)
    qa = np.empty(nv, dtype=np.int32)
    qb = np.empty(nv, dtype=np.int32)
    stamp = 0
    for _ in range(sweeps):
        for e in range(m):
            u01 = _rng_unit(s)
            if hi == lo:  # q == 1: Bernoulli, no connectivity needed
                open_bits[e] = 1 if u01 < a else 0
                continue
            if u01 < lo:
                open_bits[e] = 1
            elif u01 >= hi:
                open_bits[e] = 0
            else:
                stamp += 2
                conn = _connected_off(
                    e, eu[e], ev[e], indptr, adj_v, adj_e, open_bits, mark, qa, qb, stamp
                )
                pr = a if conn else b
                open_bits[e] = 1 if u01 < pr else 0
    return open_bits[:m]


@njit(cache=True)
def rc_chain_table(n_edges, conn_table, p, q, sweeps, init_state, seed):
    """Heat-bath chain on a tiny region with a precomputed connectivity table:
    conn_table[e, state] == 1 iff the endpoints of e are joined in the open
    graph ``state`` minus e (the bit of e is ignored by the table builder)."""
    state = init_state
    s = _rng_init(seed)
    a = p
    b = p / (p + (1.0 - p) * q)
    lo = min(a, b)
    hi = max(a, b)
    for _ in range(sweeps):
        for e in range(n_edges):
            u01 = _rng_unit(s)
            if u01 < lo:
                bit = 1
            elif u01 >= hi:
                bit = 0
            else:
                pr = a if conn_table[e, state] else b
                bit = 1 if u01 < pr else 0
            if bit:
                state |= 1 << e
            else:
                state &= ~(1 << e)
    return state


@njit(cache=True)
def rc_draws_table(n_edges, conn_table, p, q, sweeps, init_state, seeds):
    """Independent table-path chains, one per seed; returns per-state counts."""
    counts = np.zeros(1 << n_edges, dtype=np.int64)
    for i in range(seeds.size):
        state = rc_chain_table(n_edges, conn_table, p, q, sweeps, init_state, seeds[i])
        counts[state] += 1
    return counts


# ---------------------------------------------------------------------------
# Wilson's algorithm for the uniform spanning tree.


@njit(cache=True)
def wilson_tree(width, height, is_torus, seed):
    """Uniform spanning tree via loop-erased random walks, rooted at (0, 0),
    with walks started from every vertex in canonical id order.  Direction
    draws use rejection on the fixed order Right, Up, Left, Down.  Returns
    open bits in the canonical edge layout."""
    nv = width * height
    n_right = width * height if is_torus else (width - 1) * height
    n_edges = 2 * width * height if is_torus else (width - 1) * height + (height - 1) * width
    open_bits = np.zeros(n_edges, dtype=np.uint8)
    in_tree = np.zeros(nv, dtype=np.uint8)
    nxt = np.full(nv, -1, dtype=np.int8)  # chosen direction per vertex
    s = _rng_init(seed)
    in_tree[0] = 1  # root (0, 0)

    for v0 in range(nv):
        if in_tree[v0]:
            continue
        v = v0
        while in_tree[v] == 0:
            x = v % width
            y = v // width
            while True:
                d = int(_rng_next(s) & U64(3))
                if is_torus:
                    break
                if d == 0 and x < width - 1:
                    break
                if d == 1 and y < height - 1:
                    break
                if d == 2 and x > 0:
                    break
                if d == 3 and y > 0:
                    break
            nxt[v] = d
            if d == 0:
                v = y * width + ((x + 1) % width if is_torus else x + 1)
            elif d == 1:
                v = ((y + 1) % height if is_torus else y + 1) * width + x
            elif d == 2:
                v = y * width + ((x - 1) % width if is_torus else x - 1)
            else:
                v = ((y - 1) % height if is_torus else y - 1) * width + x
        v = v0
        while in_tree[v] == 0:
            in_tree[v] = 1
            x = v % width
            y = v // width
            d = nxt[v]
            if d == 0:
                e = y * width + x if is_torus else y * (width - 1) + x
                v = y * width + ((x + 1) % width if is_torus else x + 1)
            elif d == 1:
                e = n_right + y * width + x
                v = ((y + 1) % height if is_torus else y + 1) * width + x
            elif d == 2:
                px = (x - 1) % width if is_torus else x - 1
                e = y * width + px if is_torus else y * (width - 1) + px
                v = y * width + px
            else:
                py = (y - 1) % height if is_torus else y - 1
                e = n_right + py * width + x
                v = py * width + x
            open_bits[e] = 1
    return open_bits


@njit(cache=True)
def wilson_draw_states(width, height, is_torus, n_edges, seeds):
    """Batch Wilson draws on a tiny region, packed into integer states."""
    counts = np.zeros(1 << n_edges, dtype=np.int64)
    for i in range(seeds.size):
        bits = wilson_tree(width, height, is_torus, seeds[i])
        state = 0
        for e in range(n_edges):
            if bits[e]:
                state |= 1 << e
        counts[state] += 1
    return counts


# ---------------------------------------------------------------------------
# Trifurcation counting (Burton-Keane diagnostics).


@njit(cache=True)
def trifurcation_flags(nv, indptr, adj_v, adj_e, open_bits, is_bdry):
    """Per-vertex flags: 1 if deleting the vertex splits its open cluster into
    >= 3 components that each contain a boundary vertex.  Iterative DFS with
    low-links; subtree boundary counts decide which pieces reach the boundary.
    """
    disc = np.full(nv, -1, dtype=np.int32)
    low = np.empty(nv, dtype=np.int32)
    sub_b = np.zeros(nv, dtype=np.int64)  # boundary vertices in DFS subtree
    cut_b = np.zeros(nv, dtype=np.int64)  # boundary vertices in cut subtrees at v
    parent = np.full(nv, -1, dtype=np.int32)
    pieces = np.zeros(nv, dtype=np.int32)  # cut pieces w/ boundary, excl. "rest"
    comp_root = np.full(nv, -1, dtype=np.int32)
    comp_b = np.zeros(nv, dtype=np.int64)  # boundary count per component root
    flags = np.zeros(nv, dtype=np.uint8)

    stack_v = np.empty(nv, dtype=np.int32)
    stack_j = np.empty(nv, dtype=np.int64)
    timer = 0

    for start in range(nv):
        if disc[start] >= 0:
            continue
        top = 0
        stack_v[0] = start
        stack_j[0] = indptr[start]
        disc[start] = timer
        low[start] = timer
        timer += 1
        sub_b[start] = 1 if is_bdry[start] else 0
        comp_root[start] = start
        while top >= 0:
            v = stack_v[top]
            j = stack_j[top]
            if j < indptr[v + 1]:
                stack_j[top] = j + 1
                e = adj_e[j]
                if open_bits[e] == 0:
                    continue
                w = adj_v[j]
                if disc[w] < 0:
                    parent[w] = v
                    disc[w] = timer
                    low[w] = timer
                    timer += 1
                    sub_b[w] = 1 if is_bdry[w] else 0
                    comp_root[w] = start
                    top += 1
                    stack_v[top] = w
                    stack_j[top] = indptr[w]
                elif w != parent[v] and disc[w] < disc[v]:
                    if disc[w] < low[v]:
                        low[v] = disc[w]
            else:
                top -= 1
                if top >= 0:
                    u = stack_v[top]
                    if low[v] < low[u]:
                        low[u] = low[v]
                    if u == start:
                        # Deleting the root leaves exactly the child subtrees.
                        if sub_b[v] > 0:
                            pieces[u] += 1
                    elif low[v] >= disc[u]:
                        if sub_b[v] > 0:
                            pieces[u] += 1
                        cut_b[u] += sub_b[v]
                    sub_b[u] += sub_b[v]
        comp_b[start] = sub_b[start]

    for v in range(nv):
        r = comp_root[v]
        if r < 0:
            continue
        if v == r:
            good = pieces[v]
        else:
            rest = comp_b[r] - cut_b[v] - (1 if is_bdry[v] else 0)
            good = pieces[v] + (1 if rest > 0 else 0)
        if good >= 3:
            flags[v] = 1
    return flags


# ---------------------------------------------------------------------------
# One-arm probe for half-band experiments.


@njit(cache=True)
def one_arm(width, height, indptr, adj_v, adj_e, open_bits, cx, radius, visited, queue):
    """Does (cx, 0) reach L-infinity distance ``radius`` inside the band?  BFS
    confined to the ball of radius < ``radius``; returns 1 on first contact
    with the distance-``radius`` shell.  ``visited`` must be zeroed."""
    start = cx
    visited[start] = 1
    queue[0] = start
    head = 0
    tail = 1
    while head < tail:
        v = queue[head]
        head += 1
        for j in range(indptr[v], indptr[v + 1]):
            e = adj_e[j]
            if open_bits[e] == 0:
                continue
            w = adj_v[j]
            if visited[w]:
                continue
            wx = w % width
            wy = w // width
            dist = abs(wx - cx)
            if wy > dist:
                dist = wy
            if dist >= radius:
                return 1
            visited[w] = 1
            queue[tail] = w
            tail += 1
    return 0
