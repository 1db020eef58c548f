import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import percolab as pl
from percolab.lattice import (
    RIGHT,
    UP,
    BondConfig,
    EdgeRef,
    Region,
    Vertex,
    edge_at,
    edge_endpoints,
    edge_index,
    from_text,
    halfplane_restrict,
    incident_edges,
    to_text,
    translate,
)


def random_config(region, rng, p=0.5):
    return BondConfig(region, (rng.random(region.edge_count) < p).astype(np.uint8))


class TestEdgeIndexing:
    def test_first_edge_is_origin_right(self):
        assert edge_index(Region.torus(3), EdgeRef(Vertex(0, 0), RIGHT)) == 0

    def test_up_block_starts_after_right_block(self):
        # 2n^2 = 18 edges on torus(3); Right block occupies 0..8
        assert edge_at(Region.torus(3), 9) == EdgeRef(Vertex(0, 0), UP)

    @pytest.mark.parametrize(
        "region",
        [Region.torus(3), Region.torus(5), Region.box(4, 3), Region.box(2, 6), Region.box(5, 1)],
    )
    def test_round_trip_bijection(self, region):
        seen = set()
        for i in range(region.edge_count):
            e = edge_at(region, i)
            assert edge_index(region, e) == i
            seen.add(e)
        assert len(seen) == region.edge_count

    def test_edge_counts(self):
        assert Region.torus(4).edge_count == 32
        assert Region.box(4, 4).edge_count == 4 * 3 + 3 * 4
        assert Region.box(2, 3).edge_count == 3 * 1 + 2 * 2

    def test_rejects_out_of_range(self):
        r = Region.box(4, 4)
        with pytest.raises(ValueError):
            edge_index(r, EdgeRef(Vertex(3, 0), RIGHT))
        with pytest.raises(ValueError):
            edge_index(r, EdgeRef(Vertex(0, 3), UP))
        with pytest.raises(ValueError):
            edge_at(r, r.edge_count)
        with pytest.raises(ValueError):
            edge_at(r, -1)

    def test_torus_wrap_endpoints(self):
        r = Region.torus(3)
        a, b = edge_endpoints(r, edge_index(r, EdgeRef(Vertex(2, 1), RIGHT)))
        assert {a, b} == {r.vertex_id((2, 1)), r.vertex_id((0, 1))}


class TestIncidentEdges:
    def test_torus_is_four_regular(self):
        assert len(incident_edges(Region.torus(5), Vertex(2, 2))) == 4

    def test_box_corner(self):
        assert len(incident_edges(Region.box(4, 4), Vertex(0, 0))) == 2

    def test_box_side(self):
        assert len(incident_edges(Region.box(4, 4), Vertex(0, 2))) == 3

    def test_outside_vertex_rejected(self):
        with pytest.raises(ValueError):
            incident_edges(Region.box(4, 4), Vertex(4, 0))


class TestTranslate:
    def test_identity_and_periodicity(self):
        rng = np.random.default_rng(0)
        c = random_config(Region.torus(5), rng)
        assert translate(c, 0, 0) == c
        assert translate(c, 5, 0) == c
        assert translate(c, 0, -5) == c

    def test_single_edge_shift(self):
        r = Region.torus(4)
        bits = np.zeros(r.edge_count, dtype=np.uint8)
        bits[edge_index(r, EdgeRef(Vertex(1, 1), RIGHT))] = 1
        shifted = translate(BondConfig(r, bits), 1, 0)
        assert shifted.open_count() == 1
        assert shifted.is_open(EdgeRef(Vertex(2, 1), RIGHT))

    @settings(max_examples=50, deadline=None)
    @given(
        st.integers(-7, 7), st.integers(-7, 7), st.integers(-7, 7), st.integers(-7, 7),
        st.integers(0, 2**32 - 1),
    )
    def test_group_action(self, ax, ay, bx, by, seed):
        rng = np.random.default_rng(seed)
        c = random_config(Region.torus(5), rng)
        assert translate(translate(c, ax, ay), bx, by) == translate(c, ax + bx, ay + by)

    def test_rejected_on_box(self):
        with pytest.raises(ValueError):
            translate(BondConfig.all_open(Region.box(3, 3)), 1, 0)


class TestHalfplaneRestrict:
    def test_box_y0_zero_is_noop(self):
        rng = np.random.default_rng(1)
        c = random_config(Region.box(5, 4), rng)
        assert halfplane_restrict(c, 0) == c

    def test_torus4_y0_2_edge_counts(self):
        # band keeps 2*3 = 6 Right edges (wrap severed) and 4 Up edges
        band = halfplane_restrict(BondConfig.all_open(Region.torus(4)), 2)
        assert band.region == Region.box(4, 2)
        assert band.region.edge_count == 10
        assert band.open_count() == 10

    def test_bit_mapping_hand_check(self):
        r = Region.torus(4)
        bits = np.zeros(r.edge_count, dtype=np.uint8)
        bits[edge_index(r, EdgeRef(Vertex(1, 2), RIGHT))] = 1
        bits[edge_index(r, EdgeRef(Vertex(3, 2), UP))] = 1
        bits[edge_index(r, EdgeRef(Vertex(3, 2), RIGHT))] = 1  # wrap edge: severed
        bits[edge_index(r, EdgeRef(Vertex(0, 1), RIGHT))] = 1  # below y0: dropped
        band = halfplane_restrict(BondConfig(r, bits), 2)
        br = band.region
        assert band.open_count() == 2
        assert band.is_open(EdgeRef(Vertex(1, 0), RIGHT))
        assert band.is_open(EdgeRef(Vertex(3, 0), UP))

    def test_commutes_with_horizontal_translation_off_seam(self):
        # compare band bits whose column support avoids the severed seam
        rng = np.random.default_rng(2)
        n, y0, dx = 6, 3, 2
        c = random_config(Region.torus(n), rng)
        a = halfplane_restrict(translate(c, dx, 0), y0)
        b = halfplane_restrict(c, y0)
        br = a.region
        for yy in range(br.height):
            for x in range(n - 1):
                xs = x - dx
                if 0 <= xs < n - 1:  # both Right edges exist away from the seam
                    assert a.is_open(EdgeRef(Vertex(x, yy), RIGHT)) == b.is_open(
                        EdgeRef(Vertex(xs, yy), RIGHT)
                    )
            if yy < br.height - 1:
                for x in range(n):
                    xs = x - dx
                    if 0 <= xs < n:
                        assert a.is_open(EdgeRef(Vertex(x, yy), UP)) == b.is_open(
                            EdgeRef(Vertex(xs, yy), UP)
                        )

    def test_y0_out_of_range(self):
        with pytest.raises(ValueError):
            halfplane_restrict(BondConfig.all_open(Region.torus(4)), 4)


class TestSerialization:
    def test_golden_small(self):
        r = Region.box(3, 2)
        bits = np.zeros(r.edge_count, dtype=np.uint8)
        bits[edge_index(r, EdgeRef(Vertex(0, 0), RIGHT))] = 1
        bits[edge_index(r, EdgeRef(Vertex(2, 0), UP))] = 1
        text = to_text(BondConfig(r, bits))
        assert text == "box 3 2 free\n10\n00\n001\n"

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from(["torus5", "box43", "box16", "boxw"]))
    def test_round_trip(self, seed, which):
        region = {
            "torus5": Region.torus(5),
            "box43": Region.box(4, 3),
            "box16": Region.box(1, 6),
            "boxw": Region.box(3, 3, "wired"),
        }[which]
        rng = np.random.default_rng(seed)
        cfg = random_config(region, rng)
        assert from_text(to_text(cfg)) == cfg

    def test_parse_errors(self):
        with pytest.raises(ValueError):
            from_text("")
        with pytest.raises(ValueError):
            from_text("sphere 3\n")
        with pytest.raises(ValueError):
            from_text("box 3 2 free\n10\n00\n01\n")  # short row


class TestBondConfig:
    def test_length_and_values_validated(self):
        with pytest.raises(ValueError):
            BondConfig(Region.torus(3), np.zeros(5, dtype=np.uint8))
        with pytest.raises(ValueError):
            BondConfig(Region.box(2, 2), np.array([0, 1, 2, 0], dtype=np.uint8))

    def test_immutable_bits(self):
        c = BondConfig.all_open(Region.box(2, 2))
        with pytest.raises(ValueError):
            c.open[0] = 0

    def test_region_validation(self):
        with pytest.raises(ValueError):
            Region.torus(2)
        with pytest.raises(ValueError):
            Region.box(1, 1)
        with pytest.raises(ValueError):
            Region.box(2, 2, "open")
