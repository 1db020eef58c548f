"""Complement and planar-dual transforms, and the exact duality facts for boxes.

The dual of a configuration shares the primal edge index space: dual edge i is
the edge crossing primal edge i, and it is open iff primal edge i is closed.
On the torus the dual region is again a torus, so both ``complement`` and
``dual`` are literal bit-sequence involutions.  The dual of a free box is a
wired box: all plaquettes of the unbounded face are merged into one outer
vertex (the standard planar convention), which is what the enclosure check
walks.

Plaquette (x, y) means the unit face with corners (x, y), (x+1, y),
(x, y+1), (x+1, y+1); on a ``box(w, h)`` the bounded plaquettes form a
(w-1) x (h-1) grid indexed ``pid = y*(w-1) + x`` and the outer vertex gets id
``(w-1)*(h-1)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .lattice import RIGHT, UP, BondConfig, Region, edge_at, edge_index

OUTER = -1  # marker for the merged unbounded face (before id assignment)


@dataclass(frozen=True)
class DualConfig:
    """Bits of the dual process, indexed by the primal edge index space."""

    primal_region: Region
    open: np.ndarray

    def __post_init__(self):
        bits = np.ascontiguousarray(self.open, dtype=np.uint8)
        if bits.shape != (self.primal_region.edge_count,):
            raise ValueError("dual bit sequence length mismatch")
        bits.flags.writeable = False
        object.__setattr__(self, "open", bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DualConfig):
            return NotImplemented
        return self.primal_region == other.primal_region and bool(
            np.array_equal(self.open, other.open)
        )


def complement(config: BondConfig) -> BondConfig:
    """Exchange open and closed edges; same region."""
    return BondConfig(config.region, np.asarray(1 - config.open, dtype=np.uint8))


def dual(config):
    """Dual transform: dual edge i open iff primal edge i closed.

    BondConfig -> DualConfig and DualConfig -> BondConfig, so ``dual(dual(c))``
    is literally ``c`` as a bit sequence.
    """
    if isinstance(config, BondConfig):
        return DualConfig(config.region, np.asarray(1 - config.open, dtype=np.uint8))
    if isinstance(config, DualConfig):
        return BondConfig(config.primal_region, np.asarray(1 - config.open, dtype=np.uint8))
    raise TypeError(f"cannot dualize {type(config).__name__}")


def dual_as_torus_config(dc: DualConfig) -> BondConfig:
    """Geometric realization of a torus dual as a torus BondConfig.

    Dual vertex (x, y) sits at the plaquette centered (x+1/2, y+1/2).  The
    dual Right edge (x, y) crosses the primal Up edge (x+1, y), and the dual
    Up edge (x, y) crosses the primal Right edge (x, y+1); the half-integer
    offset is absorbed into this fixed identification.  Any such choice agrees
    with the others up to a torus translation.
    """
    region = dc.primal_region
    if region.kind != "torus":
        raise ValueError("geometric torus realization requires a torus region")
    n = region.n
    nn = n * n
    prim_right = dc.open[:nn].reshape(n, n)  # dual state of edges crossing Right block
    prim_up = dc.open[nn:].reshape(n, n)
    # dualRight(x, y) = dual bit of primal Up edge (x+1, y)
    right = np.roll(prim_up, shift=-1, axis=1).reshape(-1)
    # dualUp(x, y) = dual bit of primal Right edge (x, y+1)
    up = np.roll(prim_right, shift=-1, axis=0).reshape(-1)
    return BondConfig(region, np.concatenate([right, up]))


# ---------------------------------------------------------------------------
# Box dual geometry.


def box_plaquette_count(region: Region) -> int:
    if region.kind != "box":
        raise ValueError("plaquette grid is defined for boxes")
    return (region.width - 1) * (region.height - 1)


def box_dual_endpoints(region: Region, i: int) -> tuple[int, int]:
    """Endpoints of dual edge i in the box dual graph.

    Returns plaquette ids; out-of-grid plaquettes are the merged outer vertex,
    reported as ``box_plaquette_count(region)``.
    """
    if region.kind != "box":
        raise ValueError("box dual endpoints require a box region")
    w, h = region.width, region.height
    pw, ph = w - 1, h - 1
    outer = pw * ph

    def pid(px, py):
        if 0 <= px < pw and 0 <= py < ph:
            return py * pw + px
        return outer

    (x, y), d = edge_at(region, i)
    if d == RIGHT:
        # Horizontal primal edge at row y: plaquette below is (x, y-1), above (x, y).
        return pid(x, y - 1), pid(x, y)
    # Vertical primal edge at column x: plaquette left is (x-1, y), right (x, y).
    return pid(x - 1, y), pid(x, y)


def _bfs_reaches(adj: dict, start, targets: set) -> bool:
    seen = {start}
    dq = deque([start])
    while dq:
        v = dq.popleft()
        if v in targets:
            return True
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                dq.append(w)
    return False


def primal_lr_crossing(config: BondConfig) -> bool:
    """Open path joining the left and right vertex columns of a box."""
    region = config.region
    if region.kind != "box":
        raise ValueError("crossing is defined on boxes")
    from . import clusters  # local import: clusters depends on this module

    return clusters.crossing(config, clusters.LEFT_RIGHT)


_DUAL_TB_CACHE: dict = {}


def _dual_tb_geometry(region: Region):
    """Edge list of the dual top-bottom crossing graph, indexed like the
    primal edges.  Vertices are the bounded plaquettes plus TOP and BOTTOM
    terminals; ``usable[i] == 0`` marks primal edges whose dual leads into the
    unbounded face (vertical edges in the boundary columns)."""
    hit = _DUAL_TB_CACHE.get(region)
    if hit is not None:
        return hit
    w, h = region.width, region.height
    pw, ph = w - 1, h - 1
    top = pw * ph
    bottom = pw * ph + 1
    m = region.edge_count
    eu = np.zeros(m, dtype=np.int32)
    ev = np.zeros(m, dtype=np.int32)
    usable = np.zeros(m, dtype=np.uint8)
    nright = h * (w - 1)
    for i in range(nright):
        x = i % (w - 1)
        y = i // (w - 1)
        eu[i] = bottom if y == 0 else (y - 1) * pw + x
        ev[i] = top if y == h - 1 else y * pw + x
        usable[i] = 1
    for i in range(nright, m):
        r = i - nright
        x = r % w
        y = r // w
        if x == 0 or x == w - 1:
            continue
        eu[i] = y * pw + (x - 1)
        ev[i] = y * pw + x
        usable[i] = 1
    out = (pw * ph + 2, eu, ev, usable, top, bottom)
    _DUAL_TB_CACHE[region] = out
    return out


def dual_tb_crossing(config: BondConfig) -> bool:
    """Dual-open top-bottom crossing of the dual box.

    The dual crossing graph has the bounded plaquettes plus TOP and BOTTOM
    terminals.  Every horizontal primal edge contributes a dual edge (row 0
    attaches to BOTTOM, row h-1 to TOP); vertical primal edges contribute dual
    edges only in interior columns, since the boundary-column ones lead to the
    unbounded face.  A dual edge is open iff its primal edge is closed.
    """
    region = config.region
    if region.kind != "box":
        raise ValueError("dual crossing is defined on boxes")
    from . import _kernels

    nvert, eu, ev, usable, top, bottom = _dual_tb_geometry(region)
    dual_open = (1 - config.open) & usable
    labels, _ = _kernels.uf_label(nvert, eu, ev, dual_open)
    return bool(labels[top] == labels[bottom])


def crossing_duality_check(config: BondConfig) -> bool:
    """True iff exactly one of {primal left-right crossing, dual top-bottom
    crossing} holds.  This is the rectangle instance of the enclosure fact and
    must hold for every free-box configuration."""
    region = config.region
    if region.kind != "box" or region.boundary != "free":
        raise ValueError("crossing duality is stated for free boxes")
    return primal_lr_crossing(config) != dual_tb_crossing(config)


def enclosure_check(config: BondConfig, cluster_id: int, labeling=None) -> bool:
    """Does a dual open cycle separate the given cluster from the box boundary?

    Rejected if the cluster touches the boundary ring.  The check is
    constructive: the cut between the cluster's filled hull and the outside
    region must consist of closed edges whose dual edges form one simple cycle
    with the cluster inside (odd ray-crossing parity).  For interior clusters
    this certificate always exists; the function verifies it.
    """
    region = config.region
    if region.kind != "box":
        raise ValueError("enclosure check is defined on boxes")
    from . import clusters

    if labeling is None:
        labeling = clusters.label(config)
    if not (0 <= cluster_id < labeling.cluster_count):
        raise ValueError(f"no cluster {cluster_id}")
    w, h = region.width, region.height
    labels = labeling.labels
    in_c = labels == cluster_id
    xs = np.arange(w * h) % w
    ys = np.arange(w * h) // w
    ring = (xs == 0) | (xs == w - 1) | (ys == 0) | (ys == h - 1)
    if bool((in_c & ring).any()):
        raise ValueError("cluster touches the box boundary")

    # W = vertices reachable from the boundary ring through any edge, never
    # entering the cluster.  The complement of W is the cluster's filled hull.
    from .lattice import adjacency_csr

    indptr, adj_v, _ = adjacency_csr(region)
    in_w = np.zeros(w * h, dtype=bool)
    dq = deque(int(v) for v in np.nonzero(ring)[0])
    for v in dq:
        in_w[v] = True
    while dq:
        v = dq.popleft()
        for j in range(indptr[v], indptr[v + 1]):
            u = int(adj_v[j])
            if not in_w[u] and not in_c[u]:
                in_w[u] = True
                dq.append(u)

    from .lattice import edge_arrays

    eu, ev = edge_arrays(region)
    cut = np.nonzero(in_w[eu] != in_w[ev])[0]
    if cut.size == 0:
        return False
    bits = config.open
    if bits[cut].any():
        return False  # an open edge leaves the hull: no surrounding dual cycle

    # The dual edges of the cut must form one simple cycle avoiding the outer
    # vertex, with the cluster inside.
    outer = box_plaquette_count(region)
    deg: dict[int, int] = {}
    adj: dict[int, list[int]] = {}
    for i in cut:
        a, b = box_dual_endpoints(region, int(i))
        if a == outer or b == outer:
            return False
        deg[a] = deg.get(a, 0) + 1
        deg[b] = deg.get(b, 0) + 1
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    if any(d != 2 for d in deg.values()):
        return False
    start = next(iter(adj))
    seen = {start}
    dq = deque([start])
    while dq:
        v = dq.popleft()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                dq.append(u)
    if len(seen) != len(adj) or cut.size != len(adj):
        return False

    # Ray parity: march rightward from a cluster vertex at integer height y0;
    # the ray crosses exactly the cut's horizontal primal edges in that row.
    v0 = int(np.nonzero(in_c)[0][0])
    x0, y0 = v0 % w, v0 // w
    nright = h * (w - 1)
    crossings = 0
    for i in cut:
        if i >= nright:
            continue
        x = int(i) % (w - 1)
        y = int(i) // (w - 1)
        if y == y0 and x >= x0:
            crossings += 1
    return crossings % 2 == 1
