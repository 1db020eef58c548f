"""Cluster labeling and diagnostics: counts, crossings, boundary arms,
tenuousness, trifurcations.

Labels are dense ids numbered by the smallest vertex id in each cluster (in
ascending order), so they are reproducible and independent of union-find
internals.  "Infinite cluster" is proxied throughout by "touches a declared
window boundary"; each caller documents which boundary segments count.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .duality import box_dual_endpoints, box_plaquette_count
from .lattice import RIGHT, UP, WIRED, BondConfig, Region, adjacency_csr, edge_arrays

LEFT_RIGHT = "lr"
TOP_BOTTOM = "tb"

NOT_APPLICABLE = "not_applicable"
TENUOUS_PROXY = "tenuous_proxy"
NON_TENUOUS_PROXY = "non_tenuous_proxy"

_SIDES = ("left", "right", "bottom", "top")


class UnionFind:
    """Union by size with the smaller root index winning ties."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, v):
        parent = self.parent
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb] or (self.size[ra] == self.size[rb] and rb < ra):
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


@dataclass(frozen=True)
class ClusterLabeling:
    """Vertex labels plus per-cluster sizes and boundary contacts.

    ``kappa`` is the component count after applying the region's wiring: equal
    to ``cluster_count`` on tori and free boxes; on wired boxes all clusters
    touching the boundary ring merge into one.
    """

    region: Region
    labels: np.ndarray
    cluster_count: int
    sizes: np.ndarray
    kappa: int
    boundary_sides: np.ndarray  # (cluster_count, 4) bools; all-false on tori
    boundary_counts: np.ndarray  # boundary-ring vertices per cluster

    def boundary_vertices(self, cluster_id: int) -> frozenset:
        """Vertex ids of the cluster's boundary-ring contacts (boxes)."""
        region = self.region
        if region.kind != "box":
            return frozenset()
        w, h = region.width, region.height
        ids = np.nonzero(self.labels == cluster_id)[0]
        xs, ys = ids % w, ids // w
        ring = (xs == 0) | (xs == w - 1) | (ys == 0) | (ys == h - 1)
        return frozenset(int(v) for v in ids[ring])


def label(config: BondConfig) -> ClusterLabeling:
    """Cluster labeling of a config; isolated vertices are singleton clusters."""
    region = config.region
    nv = region.vertex_count
    eu, ev = edge_arrays(region)
    labels, k = _kernels.uf_label(nv, eu, ev, config.open)
    sizes = np.bincount(labels, minlength=k).astype(np.int64)
    if region.kind == "box":
        w, h = region.width, region.height
        xs = np.arange(nv) % w
        ys = np.arange(nv) // w
        side_masks = (xs == 0, xs == w - 1, ys == 0, ys == h - 1)
        boundary_sides = np.zeros((k, 4), dtype=bool)
        for s, mask in enumerate(side_masks):
            boundary_sides[np.unique(labels[mask]), s] = True
        ring = side_masks[0] | side_masks[1] | side_masks[2] | side_masks[3]
        boundary_counts = np.bincount(labels[ring], minlength=k).astype(np.int64)
        touching = int((boundary_counts > 0).sum())
        if region.boundary == WIRED and touching > 0:
            kappa = k - touching + 1
        else:
            kappa = k
    else:
        boundary_sides = np.zeros((k, 4), dtype=bool)
        boundary_counts = np.zeros(k, dtype=np.int64)
        kappa = k
    boundary_sides.flags.writeable = False
    boundary_counts.flags.writeable = False
    sizes.flags.writeable = False
    labels.flags.writeable = False
    return ClusterLabeling(region, labels, k, sizes, kappa, boundary_sides, boundary_counts)


def crossing(config: BondConfig, direction: str) -> bool:
    """Open crossing of a box between opposite sides."""
    region = config.region
    if region.kind != "box":
        raise ValueError("crossing is defined on boxes")
    if direction not in (LEFT_RIGHT, TOP_BOTTOM):
        raise ValueError(f"unknown direction {direction!r}")
    lab = label(config)
    w, h = region.width, region.height
    ids = np.arange(region.vertex_count)
    if direction == LEFT_RIGHT:
        a = lab.labels[ids % w == 0]
        b = lab.labels[ids % w == w - 1]
    else:
        a = lab.labels[ids // w == 0]
        b = lab.labels[ids // w == h - 1]
    return bool(np.intersect1d(a, b).size > 0)


def largest_cluster_fraction(config: BondConfig) -> Fraction:
    lab = label(config)
    return Fraction(int(lab.sizes.max()), config.region.vertex_count)


def clusters_csv(labeling: ClusterLabeling) -> str:
    """Per-cluster statistics as CSV.

    Columns, in order: label, size, touch_left, touch_right, touch_bottom,
    touch_top (touch flags are 0/1; all zero on tori).
    """
    lines = ["label,size,touch_left,touch_right,touch_bottom,touch_top"]
    for c in range(labeling.cluster_count):
        flags = ",".join(str(int(v)) for v in labeling.boundary_sides[c])
        lines.append(f"{c},{int(labeling.sizes[c])},{flags}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Boundary arms around an inner box.


@dataclass(frozen=True)
class ArmInterval:
    kind: str  # "primal" or "dual"
    arm_id: int
    start_slot: int
    end_slot: int  # inclusive; may wrap past slot 0 on a full circle


@dataclass(frozen=True)
class ArmSequence:
    """Arms touching the boundary of an inner box, in cyclic boundary order.

    Slots alternate around the box: vertex slots (where primal arms touch)
    and plaquette slots (where dual arms touch), clockwise from the vertex
    just above the top-left corner.  Intervals are maximal runs of slots
    claimed by one arm.
    """

    intervals: tuple
    n_slots: int

    def alternation_ok(self) -> bool:
        """Deterministic core of the arm-alternation fact: cyclically adjacent
        intervals must differ in type.  (Equal adjacent claims were already
        merged, even across unclaimed stretches, so the same arm touching
        twice around a pocket it encloses forms one interval; two distinct
        same-type arms side by side are the forbidden pattern.)"""
        kinds = [iv.kind for iv in self.intervals]
        if len(kinds) <= 1:
            return True
        m = len(kinds)
        return all(kinds[i] != kinds[(i + 1) % m] for i in range(m))


def _boundary_slots(x0, y0, x1, y1):
    """Clockwise slot walk around the box [x0,x1] x [y0,y1]: alternating
    ('v', x, y) vertex slots and ('p', x, y) plaquette slots."""
    slots = []
    for x in range(x0, x1 + 1):  # top, left to right
        slots.append(("v", x, y1 + 1))
        slots.append(("p", x, y1))
    for y in range(y1, y0 - 1, -1):  # right, top to bottom
        slots.append(("v", x1 + 1, y))
        slots.append(("p", x1, y - 1))
    for x in range(x1, x0 - 1, -1):  # bottom, right to left
        slots.append(("v", x, y0 - 1))
        slots.append(("p", x - 1, y0 - 1))
    for y in range(y0, y1 + 1):  # left, bottom to top
        slots.append(("v", x0 - 1, y))
        slots.append(("p", x0 - 1, y))
    return slots


def arms(config: BondConfig, inner_box: tuple) -> ArmSequence:
    """Primal and dual arms around ``inner_box`` = (x0, y0, x1, y1).

    Primal arms are clusters of the config restricted to window minus box
    (induced on the outside vertices) that touch a vertex adjacent to the box
    and reach the window boundary ring.  Dual arms are plaquette clusters of
    the corresponding dual restriction (dual edges of outside-induced primal
    edges only) that touch a plaquette adjacent to the box and reach the
    window's outermost plaquette ring.
    """
    region = config.region
    if region.kind != "box":
        raise ValueError("arms are computed on box windows")
    x0, y0, x1, y1 = inner_box
    w, h = region.width, region.height
    if not (1 <= x0 <= x1 <= w - 2 and 1 <= y0 <= y1 <= h - 2):
        raise ValueError("inner box must lie strictly inside the window")

    nv = region.vertex_count
    xs = np.arange(nv) % w
    ys = np.arange(nv) // w
    in_b = (xs >= x0) & (xs <= x1) & (ys >= y0) & (ys <= y1)
    outside = ~in_b

    eu, ev = edge_arrays(region)
    induced = outside[eu] & outside[ev]

    # Primal clusters of the annulus.
    uf = UnionFind(nv)
    bits = config.open
    for i in np.nonzero(induced & (bits == 1))[0]:
        uf.union(int(eu[i]), int(ev[i]))
    ring = (xs == 0) | (xs == w - 1) | (ys == 0) | (ys == h - 1)
    primal_arm_roots = {uf.find(int(v)) for v in np.nonzero(ring)[0]}

    # Dual clusters of the annulus (no outer-vertex merging: distinct dual
    # arms stay distinct, mirroring the primal side).
    pw, ph = w - 1, h - 1
    duf = UnionFind(pw * ph)
    outer = box_plaquette_count(region)
    for i in np.nonzero(induced & (bits == 0))[0]:
        a, b = box_dual_endpoints(region, int(i))
        if a != outer and b != outer:
            duf.union(a, b)
    pids = np.arange(pw * ph)
    pxs, pys = pids % pw, pids // pw
    pring = (pxs == 0) | (pxs == pw - 1) | (pys == 0) | (pys == ph - 1)
    dual_arm_roots = {duf.find(int(p)) for p in np.nonzero(pring)[0]}

    slots = _boundary_slots(x0, y0, x1, y1)
    claims = []
    for slot in slots:
        kind, x, y = slot
        if kind == "v":
            root = uf.find(y * w + x)
            claims.append(("primal", root) if root in primal_arm_roots else None)
        else:
            root = duf.find(y * pw + x)
            claims.append(("dual", root) if root in dual_arm_roots else None)

    n_slots = len(claims)
    occupied = [(pos, c) for pos, c in enumerate(claims) if c is not None]
    if not occupied:
        return ArmSequence((), n_slots)
    # Intervals are maximal cyclic runs of equal claims among the occupied
    # slots: unclaimed stretches in between do not split an arm's interval.
    if all(c == occupied[0][1] for _, c in occupied):
        kind, arm_id = occupied[0][1]
        return ArmSequence(
            (ArmInterval(kind, arm_id, occupied[0][0], occupied[-1][0]),), n_slots
        )
    k = len(occupied)
    start = 0
    while occupied[start][1] == occupied[start - 1][1]:
        start += 1
    intervals = []
    run_claim = None
    run_first = run_last = 0
    for step in range(k + 1):
        pos, c = occupied[(start + step) % k] if step < k else (None, None)
        if step == k or c != run_claim:
            if run_claim is not None:
                intervals.append(ArmInterval(run_claim[0], run_claim[1], run_first, run_last))
            run_claim = c
            run_first = pos
        run_last = pos
    return ArmSequence(tuple(intervals), n_slots)


# ---------------------------------------------------------------------------
# Tenuousness proxy on a band.


def tenuous_check(config: BondConfig, n: int, v) -> str:
    """Classify the cluster of ``v`` on a band.

    "Infinite" for the whole cluster is proxied by escaping the band: touching
    the top row or either side column (the bottom row is the half-plane floor
    and never counts).  "Infinite" for a component of the restriction to rows
    >= n is proxied by touching the top row.  Returns NOT_APPLICABLE if the
    cluster does not escape; TENUOUS_PROXY if it escapes but its restriction
    to rows >= n has no component touching the top row; NON_TENUOUS_PROXY
    otherwise.

    Any top-row contact of the cluster is itself a vertex of the restriction,
    so a restricted component touches the top exactly when the cluster does;
    the tenuous outcome is an escape through the sides with every excursion
    above row n falling short of the top.
    """
    region = config.region
    if region.kind != "box":
        raise ValueError("tenuous check runs on band (box) regions")
    if not (1 <= n < region.height):
        raise ValueError(f"n={n} out of range for band height {region.height}")
    vx, vy = v
    vid = region.vertex_id(v)
    if vy >= n:
        raise ValueError("probe vertex must lie below row n")
    w, h = region.width, region.height
    lab = label(config)
    cid = lab.labels[vid]
    member = lab.labels == cid
    ids = np.arange(region.vertex_count)
    xs, ys = ids % w, ids // w
    touches_top = bool(member[ys == h - 1].any())
    touches_side = bool(member[(xs == 0) | (xs == w - 1)].any())
    if not (touches_top or touches_side):
        return NOT_APPLICABLE
    return NON_TENUOUS_PROXY if touches_top else TENUOUS_PROXY


# ---------------------------------------------------------------------------
# Trifurcations.


def trifurcation_count(config: BondConfig):
    """Vertices whose deletion splits their cluster into >= 3 components that
    each contain a window-boundary vertex.  Returns (total, {label: count}).
    """
    region = config.region
    if region.kind != "box":
        raise ValueError("trifurcations are counted on box windows")
    nv = region.vertex_count
    w, h = region.width, region.height
    xs = np.arange(nv) % w
    ys = np.arange(nv) // w
    is_bdry = ((xs == 0) | (xs == w - 1) | (ys == 0) | (ys == h - 1)).astype(np.uint8)
    indptr, adj_v, adj_e = adjacency_csr(region)
    flags = _kernels.trifurcation_flags(nv, indptr, adj_v, adj_e, config.open, is_bdry)
    lab = label(config)
    per_cluster: dict[int, int] = {}
    for vid in np.nonzero(flags)[0]:
        c = int(lab.labels[vid])
        per_cluster[c] = per_cluster.get(c, 0) + 1
    return int(flags.sum()), per_cluster
