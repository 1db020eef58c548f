"""Finite square-lattice regions, canonical edge indexing, bond configurations.

A region is either an n-by-n torus (periodic in both directions, n >= 3) or a
width-by-height box with a free or wired boundary tag.  Edges are indexed in a
fixed canonical layout so that bit sequences are portable and test vectors are
stable across runs and platforms:

* ``torus(n)``: the Right block comes first, row-major
  (``index = y*n + x``), then the Up block, row-major
  (``index = n*n + y*n + x``).  Right edge (x, y) joins (x, y) to
  ((x+1) mod n, y); Up edge (x, y) joins (x, y) to (x, (y+1) mod n).
  ``edge_count = 2*n*n``.
* ``box(w, h)``: Right block row-major (``index = y*(w-1) + x`` for
  0 <= x < w-1), then Up block row-major (``index = h*(w-1) + y*w + x`` for
  0 <= y < h-1).  ``edge_count = h*(w-1) + (h-1)*w``.

Vertices are numbered ``id = y*width + x``.  Every value in this module is
immutable after construction and safe to share across threads.

Text serialization of a config: one header line (``torus <n>`` or
``box <w> <h> <free|wired>``) followed by the bit sequence written as rows of
0/1 characters in canonical order: the Right block one lattice row per line
(y ascending), then the Up block one lattice row per line.  Round-trips are
bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

RIGHT = 0
UP = 1

FREE = "free"
WIRED = "wired"


class Vertex(NamedTuple):
    x: int
    y: int


class EdgeRef(NamedTuple):
    """Canonical name of an undirected edge: its lower/left endpoint plus a direction."""

    base: Vertex
    dir: int


@dataclass(frozen=True)
class Region:
    kind: str  # "torus" or "box"
    width: int
    height: int
    boundary: str = FREE  # meaningful for boxes only

    def __post_init__(self):
        if self.kind == "torus":
            if self.width != self.height or self.width < 3:
                raise ValueError("torus requires width == height == n >= 3")
        elif self.kind == "box":
            if self.width < 1 or self.height < 1 or self.width * self.height < 2:
                raise ValueError("box requires at least two vertices")
            if self.boundary not in (FREE, WIRED):
                raise ValueError(f"unknown boundary tag {self.boundary!r}")
        else:
            raise ValueError(f"unknown region kind {self.kind!r}")

    @classmethod
    def torus(cls, n: int) -> "Region":
        return cls("torus", n, n)

    @classmethod
    def box(cls, width: int, height: int, boundary: str = FREE) -> "Region":
        return cls("box", width, height, boundary)

    @property
    def n(self) -> int:
        if self.kind != "torus":
            raise ValueError("n is defined for torus regions only")
        return self.width

    @property
    def is_torus(self) -> bool:
        return self.kind == "torus"

    @property
    def vertex_count(self) -> int:
        return self.width * self.height

    @property
    def right_count(self) -> int:
        if self.kind == "torus":
            return self.width * self.height
        return (self.width - 1) * self.height

    @property
    def edge_count(self) -> int:
        if self.kind == "torus":
            return 2 * self.width * self.height
        w, h = self.width, self.height
        return h * (w - 1) + (h - 1) * w

    def vertex_id(self, v) -> int:
        x, y = v
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise ValueError(f"vertex {(x, y)} outside region")
        return y * self.width + x

    def vertex_at(self, vid: int) -> Vertex:
        if not (0 <= vid < self.vertex_count):
            raise ValueError(f"vertex id {vid} out of range")
        return Vertex(vid % self.width, vid // self.width)


def edge_index(region: Region, e: EdgeRef) -> int:
    """Canonical index of an edge reference.  Inverse of :func:`edge_at`."""
    (x, y), d = e
    w, h = region.width, region.height
    if not (0 <= x < w and 0 <= y < h):
        raise ValueError(f"edge base {(x, y)} outside region")
    if d not in (RIGHT, UP):
        raise ValueError(f"bad edge direction {d!r}")
    if region.kind == "torus":
        n = region.width
        return (d * n * n) + y * n + x
    if d == RIGHT:
        if x >= w - 1:
            raise ValueError(f"Right edge at x={x} leaves the box")
        return y * (w - 1) + x
    if y >= h - 1:
        raise ValueError(f"Up edge at y={y} leaves the box")
    return h * (w - 1) + y * w + x


def edge_at(region: Region, i: int) -> EdgeRef:
    """Edge reference at canonical index ``i``.  Inverse of :func:`edge_index`."""
    if not (0 <= i < region.edge_count):
        raise ValueError(f"edge index {i} out of range")
    w, h = region.width, region.height
    if region.kind == "torus":
        n = w
        d, r = divmod(i, n * n)
        return EdgeRef(Vertex(r % n, r // n), d)
    nright = h * (w - 1)
    if i < nright:
        return EdgeRef(Vertex(i % (w - 1), i // (w - 1)), RIGHT)
    r = i - nright
    return EdgeRef(Vertex(r % w, r // w), UP)


def edge_endpoints(region: Region, i: int) -> tuple[int, int]:
    """Vertex ids of the two endpoints of edge ``i``."""
    (x, y), d = edge_at(region, i)
    w, h = region.width, region.height
    a = y * w + x
    if d == RIGHT:
        bx = (x + 1) % w if region.kind == "torus" else x + 1
        return a, y * w + bx
    by = (y + 1) % h if region.kind == "torus" else y + 1
    return a, by * w + x


def incident_edges(region: Region, v) -> list[EdgeRef]:
    """The edges meeting vertex ``v``: exactly 4 on the torus, fewer on box borders."""
    x, y = v
    region.vertex_id(v)  # validates
    w, h = region.width, region.height
    out = []
    if region.kind == "torus":
        out.append(EdgeRef(Vertex(x, y), RIGHT))
        out.append(EdgeRef(Vertex((x - 1) % w, y), RIGHT))
        out.append(EdgeRef(Vertex(x, y), UP))
        out.append(EdgeRef(Vertex(x, (y - 1) % h), UP))
        return out
    if x < w - 1:
        out.append(EdgeRef(Vertex(x, y), RIGHT))
    if x > 0:
        out.append(EdgeRef(Vertex(x - 1, y), RIGHT))
    if y < h - 1:
        out.append(EdgeRef(Vertex(x, y), UP))
    if y > 0:
        out.append(EdgeRef(Vertex(x, y - 1), UP))
    return out


@dataclass(frozen=True)
class BondConfig:
    """A bit per canonically indexed edge: 1 = open, 0 = closed.  Immutable."""

    region: Region
    open: np.ndarray

    def __post_init__(self):
        bits = np.ascontiguousarray(self.open, dtype=np.uint8)
        if bits.shape != (self.region.edge_count,):
            raise ValueError(
                f"bit sequence length {bits.shape} != edge count {self.region.edge_count}"
            )
        if bits.max(initial=0) > 1:
            raise ValueError("bit sequence must be 0/1 valued")
        bits.flags.writeable = False
        object.__setattr__(self, "open", bits)

    @classmethod
    def all_open(cls, region: Region) -> "BondConfig":
        return cls(region, np.ones(region.edge_count, dtype=np.uint8))

    @classmethod
    def all_closed(cls, region: Region) -> "BondConfig":
        return cls(region, np.zeros(region.edge_count, dtype=np.uint8))

    def open_count(self) -> int:
        return int(self.open.sum())

    def is_open(self, e: EdgeRef) -> bool:
        return bool(self.open[edge_index(self.region, e)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BondConfig):
            return NotImplemented
        return self.region == other.region and bool(np.array_equal(self.open, other.open))


def translate(config: BondConfig, dx: int, dy: int) -> BondConfig:
    """Shift a torus config by (dx, dy): the bit at edge e of the result is the
    input bit at e shifted by (-dx, -dy) mod n.  Translation by (n, 0) is the
    identity.  Rejected on box regions."""
    region = config.region
    if region.kind != "torus":
        raise ValueError("translation is defined on torus regions only")
    n = region.n
    dx %= n
    dy %= n
    if dx == 0 and dy == 0:
        return config
    blocks = []
    for d in (RIGHT, UP):
        block = config.open[d * n * n : (d + 1) * n * n].reshape(n, n)
        blocks.append(np.roll(block, shift=(dy, dx), axis=(0, 1)).reshape(-1))
    return BondConfig(region, np.concatenate(blocks))


def halfplane_restrict(config: BondConfig, y0: int) -> BondConfig:
    """Marginal of a config on the rows at height >= y0.

    The result lives on a planar band ``box(width, height - y0)``: it keeps
    exactly the edges with both endpoints at height >= y0.  For torus input
    the horizontal wrap edges (Right at x = n-1) and the vertical wrap edges
    are severed, so the band is genuinely planar; statistics near the severed
    wrap column should be excluded via a margin.
    """
    region = config.region
    if not (0 <= y0 < region.height):
        raise ValueError(f"y0={y0} out of range for region of height {region.height}")
    w, h = region.width, region.height
    hb = h - y0
    if region.kind == "box":
        band = Region.box(w, hb, region.boundary)
    else:
        band = Region.box(w, hb, FREE)
    if hb == 1 and w == 1:
        raise ValueError("restriction leaves a single vertex")
    bits = np.zeros(band.edge_count, dtype=np.uint8)
    # Right block of the band.
    for yy in range(hb):
        src_y = y0 + yy
        if region.kind == "torus":
            row = config.open[src_y * w : src_y * w + (w - 1)]
        else:
            row = config.open[src_y * (w - 1) : (src_y + 1) * (w - 1)]
        bits[yy * (w - 1) : (yy + 1) * (w - 1)] = row
    # Up block of the band.
    up0 = hb * (w - 1)
    src_up0 = w * h if region.kind == "torus" else h * (w - 1)
    for yy in range(hb - 1):
        src_y = y0 + yy
        bits[up0 + yy * w : up0 + (yy + 1) * w] = config.open[
            src_up0 + src_y * w : src_up0 + (src_y + 1) * w
        ]
    return BondConfig(band, bits)


def to_text(config: BondConfig) -> str:
    """Serialize a config: header line, then bit rows in canonical order."""
    region = config.region
    w, h = region.width, region.height
    if region.kind == "torus":
        header = f"torus {w}"
        rw, uh = w, h
    else:
        header = f"box {w} {h} {region.boundary}"
        rw, uh = w - 1, h - 1
    lines = [header]
    bits = config.open
    pos = 0
    for _ in range(h):
        lines.append("".join("01"[b] for b in bits[pos : pos + rw]))
        pos += rw
    for _ in range(uh):
        lines.append("".join("01"[b] for b in bits[pos : pos + w]))
        pos += w
    return "\n".join(lines) + "\n"


def from_text(text: str) -> BondConfig:
    """Parse the output of :func:`to_text`.  Bit-exact round trip."""
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty config text")
    head = lines[0].split()
    if head[0] == "torus":
        if len(head) != 2:
            raise ValueError(f"bad torus header {lines[0]!r}")
        region = Region.torus(int(head[1]))
        rw, uh = region.width, region.height
    elif head[0] == "box":
        if len(head) != 4:
            raise ValueError(f"bad box header {lines[0]!r}")
        region = Region.box(int(head[1]), int(head[2]), head[3])
        rw, uh = region.width - 1, region.height - 1
    else:
        raise ValueError(f"unknown region kind {head[0]!r}")
    rows = lines[1:]
    expected = region.height + uh
    if len(rows) != expected:
        raise ValueError(f"expected {expected} bit rows, found {len(rows)}")
    widths = [rw] * region.height + [region.width] * uh
    bits = []
    for row, want in zip(rows, widths):
        if len(row) != want or set(row) - {"0", "1"}:
            raise ValueError(f"bad bit row {row!r} (want {want} chars of 0/1)")
        bits.extend(1 if c == "1" else 0 for c in row)
    return BondConfig(region, np.asarray(bits, dtype=np.uint8))


# ---------------------------------------------------------------------------
# Cached integer geometry used by the fast kernels.

_GEOM_CACHE: dict = {}


def edge_arrays(region: Region) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint vertex ids (u, v) per canonical edge index, as int32 arrays."""
    key = ("edges", region)
    hit = _GEOM_CACHE.get(key)
    if hit is not None:
        return hit
    m = region.edge_count
    eu = np.empty(m, dtype=np.int32)
    ev = np.empty(m, dtype=np.int32)
    for i in range(m):
        a, b = edge_endpoints(region, i)
        eu[i] = a
        ev[i] = b
    _GEOM_CACHE[key] = (eu, ev)
    return eu, ev


def adjacency_csr(region: Region) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """CSR incidence: for vertex v, neighbors adj_v[indptr[v]:indptr[v+1]] across
    edges adj_e[...]."""
    key = ("csr", region)
    hit = _GEOM_CACHE.get(key)
    if hit is not None:
        return hit
    nv = region.vertex_count
    eu, ev = edge_arrays(region)
    deg = np.zeros(nv + 1, dtype=np.int64)
    for a, b in zip(eu, ev):
        deg[a + 1] += 1
        deg[b + 1] += 1
    indptr = np.cumsum(deg).astype(np.int64)
    adj_v = np.empty(indptr[-1], dtype=np.int32)
    adj_e = np.empty(indptr[-1], dtype=np.int32)
    fill = indptr[:-1].copy()
    for i in range(len(eu)):
        a, b = eu[i], ev[i]
        adj_v[fill[a]] = b
        adj_e[fill[a]] = i
        fill[a] += 1
        adj_v[fill[b]] = a
        adj_e[fill[b]] = i
        fill[b] += 1
    _GEOM_CACHE[key] = (indptr, adj_v, adj_e)
    return indptr, adj_v, adj_e
