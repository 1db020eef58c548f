"""Adaptive revealing procedure that hunts tenuous clusters by cutting along
columns.

The window is a free box of odd-ish width standing for the half-plane strip
[-W, W] x [0, H]; the probe vertex sits at (0, n-1) in centered coordinates
(column ``width // 2`` of the box).  Step 0 reveals the subgraph induced on
rows >= n together with the edges meeting the probe column below row n; each
later step extends the revealed span of columns to the extremes the current
cluster touches and reveals the newly covered edges.

Reveal rule (cumulative): with the revealed span of columns [lo, hi], the
revealed edge set is

* every edge with both endpoints at height >= n (the upper region),
* every vertical edge (x, y)-(x, y+1) with lo <= x <= hi and y < n (the
  y = n-1 edges connect the span to the upper region), and
* every horizontal edge (x, y)-(x+1, y) with lo-1 <= x <= hi and y < n (the
  outermost edges poke one step outside the span, so a cluster that could
  escape sideways is always visible to the halting test).

This is the set of lattice edges whose drawing intersects the real region
(lo-1, hi+1) x [0, n) together with the closed upper half ``y >= n``; with it,
a cut-off cluster is provably identical to its fully revealed counterpart, so
cut-off traces are sound against the tenuousness check.

Halting, evaluated per step on the revealed cluster C_i of the probe:
``infinite_proxy`` if C_i touches the top row; ``window_exhausted`` if it
touches a side column (the window is too small to decide); ``cut_off`` if C_i
touches neither half-strip of height n+1 beyond the current span.  Otherwise
the span grows strictly and the procedure continues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .lattice import BondConfig, Region, Vertex, adjacency_csr

INFINITE_PROXY = "infinite_proxy"
CUT_OFF = "cut_off"
WINDOW_EXHAUSTED = "window_exhausted"


@dataclass(frozen=True)
class StepRecord:
    i: int
    m_minus: int
    m_plus: int
    cluster_size: int


@dataclass(frozen=True)
class ExplorationTrace:
    n: int
    target: Vertex
    steps: tuple
    halt_reason: str
    halt_index: int

    def growth_ok(self) -> bool:
        """Strict growth of m_plus + (-m_minus) across steps."""
        spans = [s.m_plus - s.m_minus for s in self.steps]
        return all(b > a for a, b in zip(spans, spans[1:]))


def revealed_mask(region: Region, n: int, lo: int, hi: int) -> np.ndarray:
    """Cumulative revealed-edge mask for span columns [lo, hi] (see module
    docstring for the exact rule)."""
    w, h = region.width, region.height
    mask = np.zeros(region.edge_count, dtype=np.uint8)
    nright = h * (w - 1)
    # Upper region, induced: both endpoints at height >= n.
    mask[n * (w - 1) : nright] = 1  # Right edges in rows n..h-1
    mask[nright + n * w :] = 1  # Up edges in rows n..h-2
    _reveal_span(mask, region, n, lo, hi)
    return mask


def _reveal_span(mask, region, n, lo, hi):
    w, h = region.width, region.height
    nright = h * (w - 1)
    for y in range(n):
        row = nright + y * w
        mask[row + lo : row + hi + 1] = 1  # verticals, incl. the row n-1 connectors
        a = max(0, lo - 1)
        b = min(w - 2, hi)
        mask[y * (w - 1) + a : y * (w - 1) + b + 1] = 1  # horizontals with pokes
    return mask


def explore(config: BondConfig, n: int, x_origin: int = None) -> ExplorationTrace:
    """Run the revealing procedure on a band window for tenuousness parameter
    ``n``, probing the cluster of (x_origin, n-1).  ``x_origin`` defaults to
    the center column."""
    region = config.region
    if region.kind != "box":
        raise ValueError("exploration runs on box windows")
    w, h = region.width, region.height
    if not (1 <= n < h):
        raise ValueError(f"n={n} out of range for window height {h}")
    if x_origin is None:
        x_origin = w // 2
    if not (0 < x_origin < w - 1):
        raise ValueError("probe column must be interior")
    target = Vertex(x_origin, n - 1)
    target_id = region.vertex_id(target)

    indptr, adj_v, adj_e = adjacency_csr(region)
    nv = region.vertex_count
    visited = np.zeros(nv, dtype=np.uint8)
    queue = np.empty(nv, dtype=np.int32)

    lo = hi = x_origin
    mask = revealed_mask(region, n, lo, hi)
    steps = []
    i = 0
    while True:
        visited[:] = 0
        size = _kernels.cluster_bfs(
            indptr, adj_v, adj_e, config.open, mask, target_id, visited, queue
        )
        steps.append(StepRecord(i, lo - x_origin, hi - x_origin, int(size)))
        grid = visited.reshape(h, w)
        if grid[h - 1, :].any():
            return ExplorationTrace(n, target, tuple(steps), INFINITE_PROXY, i)
        if grid[:, 0].any() or grid[:, w - 1].any():
            return ExplorationTrace(n, target, tuple(steps), WINDOW_EXHAUSTED, i)
        low_rows = grid[: n + 1, :]  # the half-strips span heights 0..n
        cols = np.nonzero(low_rows.any(axis=0))[0]
        new_lo = int(cols.min())
        new_hi = int(cols.max())
        if lo <= new_lo and new_hi <= hi:
            return ExplorationTrace(n, target, tuple(steps), CUT_OFF, i)
        lo = min(lo, new_lo)
        hi = max(hi, new_hi)
        _reveal_span(mask, region, n, lo, hi)
        i += 1


def halting_bound(p: float, n: int):
    """Per-step halting floor gamma and the column edge count it is built on.

    The documented column seal rule counts, for each of the two width-1
    columns of a generic step, the n-1 vertical edges inside the column below
    row n plus the single vertical edge connecting the column to the region
    above, so ``k_col = 2n`` and ``gamma = min(p, 1-p) ** k_col``.  The
    non-halting tail is then bounded by (1-gamma)**j.
    """
    if not (0.0 < p < 1.0):
        raise ValueError("p must lie strictly between 0 and 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    k_col = 2 * n
    gamma = min(p, 1.0 - p) ** k_col
    return gamma, k_col


def traces_csv(traces) -> str:
    """Step rows plus one final halt row per trace.

    Columns: replicate,row,i,m_minus,m_plus,cluster_size,halt_reason.  A step
    row carries row='step' and an empty halt_reason; the final row per trace
    carries row='halt', i=halt_index, and the reason, with the size fields
    empty.
    """
    lines = ["replicate,row,i,m_minus,m_plus,cluster_size,halt_reason"]
    for rep, tr in enumerate(traces):
        for s in tr.steps:
            lines.append(f"{rep},step,{s.i},{s.m_minus},{s.m_plus},{s.cluster_size},")
        lines.append(f"{rep},halt,{tr.halt_index},,,,{tr.halt_reason}")
    return "\n".join(lines) + "\n"
