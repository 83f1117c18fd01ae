import pytest

from gaugelab.configspace import (
    Configuration,
    GaugeElement,
    all_configurations,
    burnside_orbit_count,
    check_equivariance,
    config_to_index,
    gauge_act,
    gauge_inv,
    gauge_mul,
    index_to_config,
    num_configurations,
    orbits,
    restrict,
    restrict_gauge,
    restriction_index_map,
)
from gaugelab.errors import BackendUnsupported
from gaugelab.graph import SubdivideEdge, apply_elementary
from gaugelab.group import U1Truncated


class TestIndexing:
    def test_roundtrip(self, triangle, z3):
        for idx in range(num_configurations(triangle, z3)):
            a = index_to_config(triangle, z3, idx)
            assert config_to_index(a, z3) == idx

    def test_first_edge_most_significant(self, chain2, z3):
        a = Configuration(chain2, (1, 0))
        assert config_to_index(a, z3) == 3

    def test_enumeration_is_total(self, chain2, z2):
        seen = {config_to_index(a, z2) for a in all_configurations(chain2, z2)}
        assert seen == set(range(4))


class TestGaugeAction:
    def test_is_an_action(self, triangle, d3):
        # (gh).a = g.(h.a) and e.a = a, sampled over a few elements.
        a = Configuration(triangle, (1, 4, 2))
        g = GaugeElement(triangle, (1, 3, 5))
        h = GaugeElement(triangle, (2, 0, 4))
        lhs = gauge_act(d3, gauge_mul(triangle, d3, g, h), a)
        rhs = gauge_act(d3, g, gauge_act(d3, h, a))
        assert lhs == rhs
        e = GaugeElement(triangle, (0, 0, 0))
        assert gauge_act(d3, e, a) == a

    def test_inverse_undoes(self, triangle, q8):
        a = Configuration(triangle, (3, 6, 1))
        g = GaugeElement(triangle, (2, 5, 7))
        back = gauge_act(q8, gauge_inv(triangle, q8, g), gauge_act(q8, g, a))
        assert back == a


class TestRestriction:
    def test_holonomy_product(self, single_edge, z4):
        fine, r = apply_elementary(single_edge, SubdivideEdge(0, 2, 1, 2))
        a = Configuration(fine, (1, 2))
        assert restrict(z4, r, a).values == (3,)

    def test_added_edge_dropped(self, chain2, z3):
        from gaugelab.graph import AddEdge
        fine, r = apply_elementary(chain2, AddEdge(edge=9, source=2, target=0))
        a = Configuration(fine, (1, 2, 2))
        assert restrict(z3, r, a).values == (1, 2)

    def test_equivariance_exhaustive(self, single_edge, d3):
        fine, r = apply_elementary(single_edge, SubdivideEdge(0, 2, 1, 2))
        report = check_equivariance(d3, r)
        assert report.ok
        assert report.info["mode"] == "exhaustive"

    def test_equivariance_sampled(self, triangle, q8):
        fine, r = apply_elementary(triangle, SubdivideEdge(0, 3, 10, 11))
        report = check_equivariance(q8, r, budget=1000, seed=1)
        assert report.ok
        assert report.info["mode"] == "sampled"

    def test_gauge_restriction(self, single_edge, z3):
        fine, r = apply_elementary(single_edge, SubdivideEdge(0, 2, 1, 2))
        g = GaugeElement(fine, (1, 2, 0))
        assert restrict_gauge(r, g).values == (1, 2)

    def test_u1_points_unsupported(self, single_edge):
        fine, r = apply_elementary(single_edge, SubdivideEdge(0, 2, 1, 2))
        with pytest.raises(BackendUnsupported):
            restrict(U1Truncated(2), r, Configuration(fine, (0, 0)))

    def test_index_map_matches_pointwise(self, chain2, z3):
        fine, r = apply_elementary(chain2, SubdivideEdge(1, 5, 6, 7))
        rmap = restriction_index_map(z3, r)
        for idx in range(num_configurations(fine, z3)):
            a = index_to_config(fine, z3, idx)
            assert rmap[idx] == config_to_index(restrict(z3, r, a), z3)


class TestOrbits:
    def test_triangle_z2_has_two_orbits(self, triangle, z2):
        table = orbits(triangle, z2)
        assert len(table.orbits) == 2
        assert burnside_orbit_count(triangle, z2) == 2

    def test_single_edge_one_orbit(self, single_edge, finite_group):
        table = orbits(single_edge, finite_group)
        assert len(table.orbits) == 1
        assert burnside_orbit_count(single_edge, finite_group) == 1

    def test_burnside_agreement(self, chain2, z3):
        assert len(orbits(chain2, z3).orbits) == burnside_orbit_count(chain2, z3)

    def test_masses_sum_to_one(self, triangle, z3):
        table = orbits(triangle, z3)
        assert sum(table.masses()) == 1

    def test_orbit_lookup(self, triangle, z2):
        table = orbits(triangle, z2)
        lookup = table.orbit_of
        for k, orb in enumerate(table.orbits):
            assert all(lookup[i] == k for i in orb.indices)
