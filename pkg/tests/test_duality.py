from collections import deque

import numpy as np
import pytest

import percolab as pl
from percolab import clusters, duality
from percolab.lattice import (
    RIGHT,
    UP,
    BondConfig,
    EdgeRef,
    Region,
    Vertex,
    adjacency_csr,
    edge_index,
)


def random_config(region, rng, p=0.5):
    return BondConfig(region, (rng.random(region.edge_count) < p).astype(np.uint8))


# --- independent BFS oracles (kept deliberately naive) ----------------------


def bfs_lr_crossing(cfg):
    reg = cfg.region
    w, h = reg.width, reg.height
    indptr, adj_v, adj_e = adjacency_csr(reg)
    seen = [False] * reg.vertex_count
    dq = deque()
    for y in range(h):
        seen[y * w] = True
        dq.append(y * w)
    while dq:
        v = dq.popleft()
        if v % w == w - 1:
            return True
        for j in range(indptr[v], indptr[v + 1]):
            if cfg.open[adj_e[j]] and not seen[adj_v[j]]:
                seen[adj_v[j]] = True
                dq.append(int(adj_v[j]))
    return False


def bfs_dual_tb_crossing(cfg):
    """Naive dual crossing: plaquettes plus TOP/BOTTOM, adjacency built from
    scratch here (independent of the library's dual geometry)."""
    reg = cfg.region
    w, h = reg.width, reg.height
    pw, ph = w - 1, h - 1
    TOP, BOTTOM = ("top",), ("bottom",)
    adj = {}

    def add(a, b):
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)

    nright = h * (w - 1)
    for i in range(reg.edge_count):
        if cfg.open[i]:
            continue
        if i < nright:
            x, y = i % (w - 1), i // (w - 1)
            below = BOTTOM if y == 0 else (x, y - 1)
            above = TOP if y == h - 1 else (x, y)
            add(below, above)
        else:
            r = i - nright
            x, y = r % w, r // w
            if x in (0, w - 1):
                continue
            add((x - 1, y), (x, y))
    seen = {TOP}
    dq = deque([TOP])
    while dq:
        v = dq.popleft()
        if v == BOTTOM:
            return True
        for u in adj.get(v, ()):
            if u not in seen:
                seen.add(u)
                dq.append(u)
    return False


class TestComplement:
    def test_all_open_to_all_closed(self):
        c = pl.complement(BondConfig.all_open(Region.torus(4)))
        assert c.open_count() == 0

    def test_involution_and_partition(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            cfg = random_config(Region.torus(5), rng)
            assert pl.complement(pl.complement(cfg)) == cfg
            assert cfg.open_count() + pl.complement(cfg).open_count() == cfg.region.edge_count


class TestDual:
    def test_all_open_torus_dualizes_to_all_closed(self):
        d = pl.dual(BondConfig.all_open(Region.torus(4)))
        assert isinstance(d, pl.DualConfig)
        assert d.open.sum() == 0

    def test_double_dual_is_identity_bits(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            cfg = random_config(Region.torus(4), rng)
            assert pl.dual(pl.dual(cfg)) == cfg

    def test_single_open_edge(self):
        # the dual edge crossing the open primal edge is closed, all others open
        r = Region.torus(4)
        bits = np.zeros(r.edge_count, dtype=np.uint8)
        i = edge_index(r, EdgeRef(Vertex(1, 2), RIGHT))
        bits[i] = 1
        d = pl.dual(BondConfig(r, bits))
        assert d.open[i] == 0
        assert d.open.sum() == r.edge_count - 1

    def test_dual_of_bernoulli_is_bernoulli_complement(self):
        # empirical single-edge marginals of dual samples match 1-p within 3 SE
        from percolab import samplers

        p, n_draws = 0.3, 4000
        r = Region.torus(6)
        acc = np.zeros(r.edge_count)
        for s in range(n_draws):
            cfg = samplers.sample(samplers.SampleSpec(samplers.BERNOULLI, r, s, p=p))
            acc += pl.dual(cfg).open
        marg = acc / n_draws
        se = np.sqrt(p * (1 - p) / n_draws)
        assert np.all(np.abs(marg - (1 - p)) < 3 * se + 0.02)

    def test_torus_realization_preserves_involution_geometry(self):
        # realized dual of the realized dual is a double translation of the
        # original complement structure; spot check edge correspondence
        r = Region.torus(5)
        rng = np.random.default_rng(9)
        cfg = random_config(r, rng)
        real = duality.dual_as_torus_config(pl.dual(cfg))
        # dualRight(x, y) crosses primal Up(x+1, y)
        for x in range(5):
            for y in range(5):
                assert real.is_open(EdgeRef(Vertex(x, y), RIGHT)) != cfg.is_open(
                    EdgeRef(Vertex((x + 1) % 5, y), UP)
                )
                assert real.is_open(EdgeRef(Vertex(x, y), UP)) != cfg.is_open(
                    EdgeRef(Vertex(x, (y + 1) % 5), RIGHT)
                )


class TestCrossingDuality:
    def test_all_open_and_all_closed(self):
        reg = Region.box(5, 4)
        assert duality.crossing_duality_check(BondConfig.all_open(reg))
        assert duality.crossing_duality_check(BondConfig.all_closed(reg))
        assert duality.primal_lr_crossing(BondConfig.all_open(reg))
        assert duality.dual_tb_crossing(BondConfig.all_closed(reg))

    def test_exhaustive_3x3_box(self):
        reg = Region.box(3, 3)
        for state in range(1 << 12):
            bits = np.array([(state >> i) & 1 for i in range(12)], dtype=np.uint8)
            assert duality.crossing_duality_check(BondConfig(reg, bits))

    def test_random_16x16_against_bfs_oracle(self):
        rng = np.random.default_rng(7)
        reg = Region.box(16, 16)
        for _ in range(10000):
            cfg = random_config(reg, rng)
            primal = bfs_lr_crossing(cfg)
            dual_x = bfs_dual_tb_crossing(cfg)
            assert primal != dual_x
            assert duality.primal_lr_crossing(cfg) == primal
            assert duality.dual_tb_crossing(cfg) == dual_x

    def test_rejects_torus_and_wired(self):
        with pytest.raises(ValueError):
            duality.crossing_duality_check(BondConfig.all_open(Region.torus(4)))
        with pytest.raises(ValueError):
            duality.crossing_duality_check(BondConfig.all_open(Region.box(3, 3, "wired")))


class TestEnclosure:
    def make_unit_square(self, reg, x0, y0):
        bits = np.zeros(reg.edge_count, dtype=np.uint8)
        for e in (
            EdgeRef(Vertex(x0, y0), RIGHT),
            EdgeRef(Vertex(x0, y0 + 1), RIGHT),
            EdgeRef(Vertex(x0, y0), UP),
            EdgeRef(Vertex(x0 + 1, y0), UP),
        ):
            bits[edge_index(reg, e)] = 1
        return BondConfig(reg, bits)

    def test_isolated_unit_square_is_enclosed(self):
        reg = Region.box(6, 6)
        cfg = self.make_unit_square(reg, 2, 2)
        lab = clusters.label(cfg)
        cid = int(lab.labels[reg.vertex_id((2, 2))])
        assert duality.enclosure_check(cfg, cid, lab)

    def test_boundary_cluster_rejected(self):
        reg = Region.box(6, 6)
        cfg = BondConfig.all_open(reg)
        with pytest.raises(ValueError):
            duality.enclosure_check(cfg, 0)

    def test_random_12x12_all_interior_clusters(self):
        rng = np.random.default_rng(11)
        reg = Region.box(12, 12)
        ids = np.arange(reg.vertex_count)
        xs, ys = ids % 12, ids // 12
        ring = (xs == 0) | (xs == 11) | (ys == 0) | (ys == 11)
        checked = 0
        for _ in range(1000):
            cfg = random_config(reg, rng)
            lab = clusters.label(cfg)
            touching = set(np.unique(lab.labels[ring]))
            for cid in range(lab.cluster_count):
                if cid in touching:
                    continue
                assert duality.enclosure_check(cfg, cid, lab)
                checked += 1
        assert checked > 1000  # plenty of interior clusters exercised
