"""Exact and MCMC samplers for every measure in the laboratory, plus
brute-force enumeration oracles for distribution-level validation.

Models: ``bernoulli`` (independent edges), ``random_cluster`` (single-edge
heat-bath sweeps in canonical edge order with exact connectivity queries,
valid for all q > 0), ``ust`` (Wilson's algorithm rooted at (0, 0)),
``uniform_even`` (independent plaquette signs; on the torus, XOR with a
uniform homology representative from {nothing, horizontal wrap cycle,
vertical wrap cycle, both}), and ``uniform_odd`` (uniform even XOR the fixed
reference perfect matching of horizontal dimers ((2x, y), (2x+1, y))).

Determinism: a spec with the same seed yields a bit-identical config.
Bernoulli and sign draws use NumPy's PCG64; the random-cluster chain and
Wilson walks use the deterministic in-kernel generator.  Exact tables store
rational probabilities keyed by the config's edge-bit mask (bit i = canonical
edge i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import _kernels
from .lattice import (
    RIGHT,
    UP,
    WIRED,
    BondConfig,
    Region,
    adjacency_csr,
    edge_arrays,
    edge_index,
    EdgeRef,
    Vertex,
)

BERNOULLI = "bernoulli"
RANDOM_CLUSTER = "random_cluster"
UST = "ust"
UNIFORM_EVEN = "uniform_even"
UNIFORM_ODD = "uniform_odd"
MODELS = (BERNOULLI, RANDOM_CLUSTER, UST, UNIFORM_EVEN, UNIFORM_ODD)

ALL_OPEN = "all_open"
ALL_CLOSED = "all_closed"

_TABLE_MAX_EDGES = 12  # connectivity-table fast path for the heat-bath chain


@dataclass(frozen=True)
class SampleSpec:
    model: str
    region: Region
    seed: int
    p: float = None
    q: float = None
    sweeps: int = None
    init: str = ALL_CLOSED

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.model in (BERNOULLI, RANDOM_CLUSTER):
            if self.p is None or not (0.0 < self.p < 1.0):
                raise ValueError("p must lie strictly between 0 and 1")
        if self.model == RANDOM_CLUSTER:
            if self.q is None or not self.q > 0:
                raise ValueError("q must be positive")
            if self.sweeps is None or self.sweeps < 1:
                raise ValueError("sweeps must be >= 1")
            if self.init not in (ALL_OPEN, ALL_CLOSED):
                raise ValueError(f"unknown init {self.init!r}")
        if self.model == UNIFORM_ODD:
            r = self.region
            if r.kind != "torus" or r.n % 2 != 0:
                raise ValueError(
                    "uniform_odd requires a torus with even n (a perfect matching must exist)"
                )
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_config(cls, conf: dict) -> "SampleSpec":
        """Build a spec from flat config keys: model, p, q, sweeps, init,
        n or width/height, boundary, seed."""
        model = conf["model"]
        if "n" in conf:
            region = Region.torus(int(conf["n"]))
        else:
            region = Region.box(
                int(conf["width"]), int(conf["height"]), conf.get("boundary", "free")
            )
        return cls(
            model=model,
            region=region,
            seed=int(conf.get("seed", 0)),
            p=float(conf["p"]) if "p" in conf else None,
            q=float(conf["q"]) if "q" in conf else None,
            sweeps=int(conf["sweeps"]) if "sweeps" in conf else None,
            init=conf.get("init", ALL_CLOSED),
        )


def p_sd(q: float) -> float:
    """Self-dual point sqrt(q)/(1+sqrt(q)) of the square-lattice random-cluster
    model."""
    if q <= 0:
        raise ValueError("q must be positive")
    r = math.sqrt(q)
    return r / (1.0 + r)


def rc_conditional(p: float, q: float, endpoints_connected_off_e: bool) -> float:
    """Heat-bath conditional: probability the edge is open given the rest."""
    if endpoints_connected_off_e:
        return p
    return p / (p + (1.0 - p) * q)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


# ---------------------------------------------------------------------------
# Model samplers.


def _sample_bernoulli(spec: SampleSpec) -> np.ndarray:
    rng = _rng(spec.seed)
    return (rng.random(spec.region.edge_count) < spec.p).astype(np.uint8)


_RC_GEOM_CACHE: dict = {}


def _rc_geometry(region: Region):
    """Adjacency for the chain, with wired boundaries expressed as
    permanently-open pseudo edges to a virtual vertex."""
    hit = _RC_GEOM_CACHE.get(region)
    if hit is not None:
        return hit
    nv = region.vertex_count
    eu, ev = edge_arrays(region)
    pseudo = []
    if region.kind == "box" and region.boundary == WIRED:
        w, h = region.width, region.height
        ids = np.arange(nv)
        xs, ys = ids % w, ids // w
        ring = np.nonzero((xs == 0) | (xs == w - 1) | (ys == 0) | (ys == h - 1))[0]
        pseudo = [(int(v), nv) for v in ring]
        nv_aug = nv + 1
    else:
        nv_aug = nv
    m = len(eu)
    all_u = np.concatenate([eu, np.array([a for a, _ in pseudo], dtype=np.int32)])
    all_v = np.concatenate([ev, np.array([b for _, b in pseudo], dtype=np.int32)])
    deg = np.zeros(nv_aug + 1, dtype=np.int64)
    for a, b in zip(all_u, all_v):
        deg[a + 1] += 1
        deg[b + 1] += 1
    indptr = np.cumsum(deg)
    adj_v = np.empty(indptr[-1], dtype=np.int32)
    adj_e = np.empty(indptr[-1], dtype=np.int32)
    fill = indptr[:-1].copy()
    for i in range(len(all_u)):
        a, b = int(all_u[i]), int(all_v[i])
        adj_v[fill[a]] = b
        adj_e[fill[a]] = i
        fill[a] += 1
        adj_v[fill[b]] = a
        adj_e[fill[b]] = i
        fill[b] += 1
    out = (nv_aug, eu, ev, len(pseudo), indptr, adj_v, adj_e)
    _RC_GEOM_CACHE[region] = out
    return out


_CONN_TABLE_CACHE: dict = {}


def connectivity_table(region: Region) -> np.ndarray:
    """conn[e, state] == 1 iff the endpoints of edge e are joined in the open
    graph ``state`` minus e (respecting wired boundaries).  Exact; exposed so
    tests can cross-check it against the BFS path.  Regions up to
    2**edge_count * edge_count table entries only."""
    hit = _CONN_TABLE_CACHE.get(region)
    if hit is not None:
        return hit
    m = region.edge_count
    if m > _TABLE_MAX_EDGES:
        raise ValueError(f"connectivity table limited to {_TABLE_MAX_EDGES} edges")
    nv = region.vertex_count
    eu, ev = edge_arrays(region)
    wired = region.kind == "box" and region.boundary == WIRED
    if wired:
        w, h = region.width, region.height
        ids = np.arange(nv)
        xs, ys = ids % w, ids // w
        ring = np.nonzero((xs == 0) | (xs == w - 1) | (ys == 0) | (ys == h - 1))[0]
    table = np.zeros((m, 1 << m), dtype=np.uint8)
    for state in range(1 << m):
        parent = list(range(nv + 1))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        edges_in = [i for i in range(m) if state >> i & 1]
        for e in range(m):
            par = list(range(nv + 1))

            def find2(a, par=par):
                while par[a] != a:
                    par[a] = par[par[a]]
                    a = par[a]
                return a

            for i in edges_in:
                if i == e:
                    continue
                ra, rb = find2(int(eu[i])), find2(int(ev[i]))
                if ra != rb:
                    par[rb] = ra
            if wired:
                for v in ring:
                    ra, rb = find2(int(v)), find2(nv)
                    if ra != rb:
                        par[rb] = ra
            table[e, state] = 1 if find2(int(eu[e])) == find2(int(ev[e])) else 0
    _CONN_TABLE_CACHE[region] = table
    return table


def _sample_rc(spec: SampleSpec) -> np.ndarray:
    region = spec.region
    init = 1 if spec.init == ALL_OPEN else 0
    if region.edge_count <= _TABLE_MAX_EDGES:
        table = connectivity_table(region)
        init_state = (1 << region.edge_count) - 1 if init else 0
        state = _kernels.rc_chain_table(
            region.edge_count, table, spec.p, spec.q, spec.sweeps, init_state, np.uint64(spec.seed)
        )
        bits = np.array(
            [(int(state) >> i) & 1 for i in range(region.edge_count)], dtype=np.uint8
        )
        return bits
    nv_aug, eu, ev, n_pseudo, indptr, adj_v, adj_e = _rc_geometry(region)
    return _kernels.rc_chain(
        nv_aug, eu, ev, n_pseudo, indptr, adj_v, adj_e, spec.p, spec.q, spec.sweeps, init, np.uint64(spec.seed)
    )


def _sample_ust(spec: SampleSpec) -> np.ndarray:
    region = spec.region
    return _kernels.wilson_tree(region.width, region.height, region.is_torus, np.uint64(spec.seed))


def reference_matching_bits(region: Region) -> np.ndarray:
    """The fixed reference perfect matching: horizontal dimers
    ((2x, y), (2x+1, y)).  Torus with even n only."""
    if region.kind != "torus" or region.n % 2 != 0:
        raise ValueError("reference matching requires a torus with even n")
    n = region.n
    bits = np.zeros(region.edge_count, dtype=np.uint8)
    for y in range(n):
        for x in range(0, n, 2):
            bits[y * n + x] = 1
    return bits


def _even_bits_from_signs_torus(signs: np.ndarray) -> np.ndarray:
    """Edge bits of the even subgraph induced by plaquette signs on a torus.

    Plaquette (x, y) is the face with lower-left corner (x, y).  A horizontal
    edge (x, y) separates plaquettes (x, y) above and (x, y-1) below; a
    vertical edge (x, y) separates (x, y) right and (x-1, y) left.
    """
    right = (signs == np.roll(signs, 1, axis=0)).astype(np.uint8)  # [y, x]
    up = (signs == np.roll(signs, 1, axis=1)).astype(np.uint8)
    return np.concatenate([right.reshape(-1), up.reshape(-1)])


def _homology_bits(region: Region, hbit: int, vbit: int) -> np.ndarray:
    """Representative of the homology class (hbit, vbit): the horizontal wrap
    cycle is row 0 of the Right block, the vertical wrap cycle column 0 of the
    Up block."""
    n = region.n
    bits = np.zeros(region.edge_count, dtype=np.uint8)
    if hbit:
        bits[0:n] = 1
    if vbit:
        bits[n * n + 0 :: n] = 1
    return bits


def _sample_even(spec: SampleSpec) -> np.ndarray:
    region = spec.region
    rng = _rng(spec.seed)
    if region.kind == "torus":
        n = region.n
        signs = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
        bits = _even_bits_from_signs_torus(signs)
        hbit, vbit = rng.integers(0, 2, size=2)
        bits ^= _homology_bits(region, int(hbit), int(vbit))
        return bits
    # On a box the uniform even subgraph is the dual cut space: an edge is
    # open iff its two faces carry DIFFERENT signs.  (The torus uses the
    # same-sign rule; on a 4-regular graph the two agree up to complement,
    # but at degree-3 box boundary vertices only the cut form is even.)
    w, h = region.width, region.height
    pw, ph = w - 1, h - 1
    signs = rng.integers(0, 2, size=(ph, pw), dtype=np.uint8)
    outer = int(rng.integers(0, 2))
    bits = np.zeros(region.edge_count, dtype=np.uint8)

    def face(px, py):
        if 0 <= px < pw and 0 <= py < ph:
            return int(signs[py, px])
        return outer

    k = 0
    for y in range(h):
        for x in range(w - 1):
            if face(x, y) != face(x, y - 1):
                bits[k] = 1
            k += 1
    for y in range(h - 1):
        for x in range(w):
            if face(x, y) != face(x - 1, y):
                bits[k] = 1
            k += 1
    return bits


def _sample_odd(spec: SampleSpec) -> np.ndarray:
    bits = _sample_even(spec)
    return bits ^ reference_matching_bits(spec.region)


def sample(spec: SampleSpec) -> BondConfig:
    """Draw one configuration.  Same spec (including seed): same bits."""
    if spec.model == BERNOULLI:
        bits = _sample_bernoulli(spec)
    elif spec.model == RANDOM_CLUSTER:
        bits = _sample_rc(spec)
    elif spec.model == UST:
        bits = _sample_ust(spec)
    elif spec.model == UNIFORM_EVEN:
        bits = _sample_even(spec)
    else:
        bits = _sample_odd(spec)
    return BondConfig(spec.region, bits)


# ---------------------------------------------------------------------------
# Batched sampling for distribution tests (states as edge-bit masks).


def batch_even_states(region: Region, n_draws: int, seed: int, chunk: int = 1 << 15) -> np.ndarray:
    """Uniform-even draws packed into bit masks; torus draws include the
    homology correction.  Vectorized across draws."""
    m = region.edge_count
    if m > 63:
        raise ValueError("bit-mask packing supports at most 63 edges")
    weights = (np.uint64(1) << np.arange(m, dtype=np.uint64)).astype(np.uint64)
    rng = _rng(seed)
    out = np.empty(n_draws, dtype=np.uint64)
    pos = 0
    if region.kind == "torus":
        n = region.n
        hmask = int(_homology_bits(region, 1, 0) @ weights)
        vmask = int(_homology_bits(region, 0, 1) @ weights)
        while pos < n_draws:
            b = min(chunk, n_draws - pos)
            signs = rng.integers(0, 2, size=(b, n, n), dtype=np.uint8)
            right = (signs == np.roll(signs, 1, axis=1)).astype(np.uint64)
            up = (signs == np.roll(signs, 1, axis=2)).astype(np.uint64)
            bits = np.concatenate([right.reshape(b, -1), up.reshape(b, -1)], axis=1)
            states = bits @ weights
            hv = rng.integers(0, 2, size=(b, 2), dtype=np.uint8)
            states ^= np.where(hv[:, 0] == 1, np.uint64(hmask), np.uint64(0))
            states ^= np.where(hv[:, 1] == 1, np.uint64(vmask), np.uint64(0))
            out[pos : pos + b] = states
            pos += b
        return out
    # Box: vectorized form of the cut construction (open iff faces differ).
    w, h = region.width, region.height
    pw, ph = w - 1, h - 1
    while pos < n_draws:
        b = min(chunk, n_draws - pos)
        signs = rng.integers(0, 2, size=(b, ph, pw), dtype=np.uint8)
        outer = rng.integers(0, 2, size=(b, 1, 1), dtype=np.uint8)
        padded = np.concatenate(
            [np.broadcast_to(outer, (b, 1, pw + 2)),
             np.concatenate([np.broadcast_to(outer, (b, ph, 1)), signs,
                             np.broadcast_to(outer, (b, ph, 1))], axis=2),
             np.broadcast_to(outer, (b, 1, pw + 2))],
            axis=1,
        )  # faces with an outer halo: padded[:, y+1, x+1] = face(x, y)
        cols = []
        for y in range(h):
            ne = padded[:, y + 1, 1 : 1 + pw] != padded[:, y, 1 : 1 + pw]
            cols.append(ne.astype(np.uint64))
        for y in range(h - 1):
            ne = padded[:, y + 1, 1 : 1 + w] != padded[:, y + 1, 0:w]
            cols.append(ne.astype(np.uint64))
        bits = np.concatenate(cols, axis=1)
        out[pos : pos + b] = bits @ weights
        pos += b
    return out


def batch_odd_states(region: Region, n_draws: int, seed: int) -> np.ndarray:
    m = region.edge_count
    weights = (np.uint64(1) << np.arange(m, dtype=np.uint64)).astype(np.uint64)
    mmask = np.uint64(reference_matching_bits(region) @ weights)
    return batch_even_states(region, n_draws, seed) ^ mmask


# ---------------------------------------------------------------------------
# Exact enumeration oracles.


@dataclass(frozen=True)
class ExactTable:
    """Exact distribution over configs, keyed by edge-bit mask."""

    region: Region
    probs: dict

    def total(self) -> Fraction:
        return sum(self.probs.values(), start=Fraction(0))


def _kappa_of_state(region: Region, state: int):
    bits = np.array([(state >> i) & 1 for i in range(region.edge_count)], dtype=np.uint8)
    from . import clusters

    lab = clusters.label(BondConfig(region, bits))
    return lab


def _spanning_tree_masks(region: Region) -> list:
    """Fundamental-cycle masks of the cycle space (one per non-tree edge)."""
    nv = region.vertex_count
    eu, ev = edge_arrays(region)
    parent_v = [-1] * nv
    parent_e = [-1] * nv
    order = []
    seen = [False] * nv
    from collections import deque

    indptr, adj_v, adj_e = adjacency_csr(region)
    seen[0] = True
    dq = deque([0])
    tree_edges = set()
    while dq:
        v = dq.popleft()
        order.append(v)
        for j in range(indptr[v], indptr[v + 1]):
            w_ = int(adj_v[j])
            if not seen[w_]:
                seen[w_] = True
                parent_v[w_] = v
                parent_e[w_] = int(adj_e[j])
                tree_edges.add(int(adj_e[j]))
                dq.append(w_)
    depth = [0] * nv
    for v in order:
        if parent_v[v] >= 0:
            depth[v] = depth[parent_v[v]] + 1
    masks = []
    for i in range(region.edge_count):
        if i in tree_edges:
            continue
        a, b = int(eu[i]), int(ev[i])
        mask = 1 << i
        da, db = depth[a], depth[b]
        while da > db:
            mask ^= 1 << parent_e[a]
            a = parent_v[a]
            da -= 1
        while db > da:
            mask ^= 1 << parent_e[b]
            b = parent_v[b]
            db -= 1
        while a != b:
            mask ^= 1 << parent_e[a]
            mask ^= 1 << parent_e[b]
            a = parent_v[a]
            b = parent_v[b]
        masks.append(mask)
    return masks


def _even_states(region: Region) -> list:
    masks = _spanning_tree_masks(region)
    dim = len(masks)
    if dim > 20:
        raise ValueError(f"cycle space dimension {dim} too large to enumerate")
    states = [0]
    for mk in masks:
        states += [s ^ mk for s in states]
    return states


def enumerate_exact(model: str, region: Region, p=None, q=None) -> ExactTable:
    """Exact distribution on a small region.

    Bernoulli and random-cluster sum weights over all 2**edge_count configs
    (edge_count <= 20); the random-cluster weight is (p/(1-p))^open q^kappa
    with kappa respecting the region's wiring.  UST is uniform over spanning
    trees.  Uniform even/odd are uniform over their supports, enumerated
    through a cycle-space basis, which also admits regions whose edge count
    exceeds 20 as long as the cycle dimension is at most 20.
    """
    m = region.edge_count
    if model in (UNIFORM_EVEN, UNIFORM_ODD):
        if model == UNIFORM_ODD and (region.kind != "torus" or region.n % 2):
            raise ValueError("uniform_odd requires a torus with even n")
        states = _even_states(region)
        if model == UNIFORM_ODD:
            weights = [1 << i for i in range(m)]
            mbits = reference_matching_bits(region)
            mmask = sum(w for w, b in zip(weights, mbits) if b)
            states = [s ^ mmask for s in states]
        mass = Fraction(1, len(states))
        return ExactTable(region, {s: mass for s in states})
    if m > 20:
        raise ValueError(f"edge count {m} too large for exact enumeration")
    if model == BERNOULLI:
        if p is None:
            raise ValueError("bernoulli needs p")
        pf = Fraction(p)
        probs = {}
        for state in range(1 << m):
            k = bin(state).count("1")
            probs[state] = pf**k * (1 - pf) ** (m - k)
        return ExactTable(region, probs)
    if model == RANDOM_CLUSTER:
        if p is None or q is None:
            raise ValueError("random_cluster needs p and q")
        pf, qf = Fraction(p), Fraction(q)
        ratio = pf / (1 - pf)
        weights = {}
        for state in range(1 << m):
            lab = _kappa_of_state(region, state)
            weights[state] = ratio ** bin(state).count("1") * qf**lab.kappa
        z = sum(weights.values(), start=Fraction(0))
        return ExactTable(region, {s: w / z for s, w in weights.items()})
    if model == UST:
        from . import clusters

        nv = region.vertex_count
        trees = []
        for state in range(1 << m):
            if bin(state).count("1") != nv - 1:
                continue
            lab = _kappa_of_state(region, state)
            if lab.cluster_count == 1:
                trees.append(state)
        mass = Fraction(1, len(trees))
        return ExactTable(region, {s: mass for s in trees})
    raise ValueError(f"unknown model {model!r}")


def tv_distance(table: ExactTable, counts: dict, n_draws: int) -> float:
    """Total-variation distance between an empirical distribution (counts per
    state) and an exact table."""
    states = set(table.probs) | set(counts)
    acc = 0.0
    for s in states:
        emp = counts.get(s, 0) / n_draws
        acc += abs(emp - float(table.probs.get(s, 0)))
    return acc / 2.0


def config_state(config: BondConfig) -> int:
    """Edge-bit mask of a config (bit i = canonical edge i)."""
    return int(sum(1 << i for i in np.nonzero(config.open)[0]))
