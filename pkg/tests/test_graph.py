import pytest

from gaugelab.errors import InvalidPath, MissingReference, WouldViolateAssumption
from gaugelab.graph import (
    AddEdge,
    AddVertexEdge,
    OrientedGraph,
    Edge,
    SubdivideEdge,
    apply_elementary,
    compose_refinements,
    concat_paths,
    decompose_elementary,
    identity_refinement,
    make_graph,
    make_path,
    map_path,
    relabel_graph,
    relabel_refinement,
    replay,
    validate_graph,
)


class TestValidation:
    def test_self_loop_rejected(self):
        g = OrientedGraph(frozenset([0]), (Edge(0, 0, 0),))
        report = validate_graph(g)
        assert not report.ok
        assert any(v.code == "SelfLoop" for v in report.violations)

    def test_parallel_edges_rejected(self):
        g = OrientedGraph(frozenset([0, 1]), (Edge(0, 0, 1), Edge(1, 1, 0)))
        report = validate_graph(g)
        assert any(v.code == "ParallelEdge" for v in report.violations)

    def test_disconnected_rejected(self):
        g = OrientedGraph(frozenset([0, 1, 2, 3]), (Edge(0, 0, 1), Edge(1, 2, 3)))
        assert any(v.code == "NotConnected" for v in validate_graph(g).violations)

    def test_dangling_endpoint_rejected(self):
        g = OrientedGraph(frozenset([0, 1]), (Edge(0, 0, 7),))
        assert any(v.code == "DanglingEndpoint" for v in validate_graph(g).violations)

    def test_make_graph_raises_on_invalid(self):
        with pytest.raises(WouldViolateAssumption):
            make_graph([0], [(0, 0, 0)])

    def test_valid_triangle(self, triangle):
        assert validate_graph(triangle).ok
        assert triangle.num_vertices == 3
        assert triangle.num_edges == 3


class TestPaths:
    def test_composable_steps(self, chain2):
        p = make_path(chain2, [0, 1])
        assert p.start == 0
        assert p.end == 2

    def test_non_composable_rejected(self, triangle):
        with pytest.raises(InvalidPath):
            make_path(triangle, [0, 2])  # 0->1 then 2->0 do not chain

    def test_empty_path_needs_anchor(self, triangle):
        with pytest.raises(InvalidPath):
            make_path(triangle, [])
        p = make_path(triangle, [], anchor=1)
        assert p.start == p.end == 1

    def test_concat(self, chain2):
        p = make_path(chain2, [0])
        q = make_path(chain2, [1])
        assert concat_paths(p, q).steps == (0, 1)
        with pytest.raises(InvalidPath):
            concat_paths(q, p)


class TestElementarySteps:
    def test_subdivide(self, single_edge):
        fine, r = apply_elementary(single_edge, SubdivideEdge(0, 2, 1, 2))
        assert fine.num_edges == 2
        assert r.edge_map[0].steps == (1, 2)
        assert r.vertex_map == {0: 0, 1: 1}

    def test_add_edge(self, chain2):
        fine, r = apply_elementary(chain2, AddEdge(edge=5, source=2, target=0))
        assert fine.num_edges == 3
        assert r.edge_map[0].steps == (0,)

    def test_add_edge_parallel_rejected(self, chain2):
        with pytest.raises(WouldViolateAssumption):
            apply_elementary(chain2, AddEdge(edge=5, source=0, target=1))

    def test_add_edge_self_loop_rejected(self, chain2):
        with pytest.raises(WouldViolateAssumption):
            apply_elementary(chain2, AddEdge(edge=5, source=1, target=1))

    def test_add_vertex_edge(self, single_edge):
        fine, r = apply_elementary(
            single_edge, AddVertexEdge(vertex=5, edge=3, source=1, target=5))
        assert 5 in fine.vertices
        assert fine.edge(3).source == 1

    def test_add_vertex_edge_needs_fresh_vertex(self, single_edge):
        with pytest.raises(WouldViolateAssumption):
            apply_elementary(
                single_edge, AddVertexEdge(vertex=0, edge=3, source=1, target=0))

    def test_stale_edge_reference(self, single_edge):
        with pytest.raises(MissingReference):
            apply_elementary(single_edge, SubdivideEdge(9, 2, 1, 2))


class TestRefinements:
    def test_identity(self, triangle):
        r = identity_refinement(triangle)
        assert r.edge_map[1].steps == (1,)

    def test_compose(self, single_edge):
        mid, r1 = apply_elementary(single_edge, SubdivideEdge(0, 2, 1, 2))
        fine, r2 = apply_elementary(mid, SubdivideEdge(1, 3, 3, 4))
        r = compose_refinements(r1, r2)
        assert r.edge_map[0].steps == (3, 4, 2)

    def test_map_path_respects_concat(self, chain2):
        fine, r = apply_elementary(chain2, SubdivideEdge(0, 9, 7, 8))
        p = make_path(chain2, [0, 1])
        image = map_path(r, p)
        assert image.steps == (7, 8, 1)
        empty = make_path(chain2, [], anchor=1)
        assert map_path(r, empty).is_empty


class TestDecomposition:
    @staticmethod
    def roundtrip(coarse, r):
        decomp = decompose_elementary(r)
        replayed_graph, replayed_r = replay(coarse, decomp.steps)
        relabeled = relabel_graph(replayed_graph, decomp.vertex_alias,
                                  decomp.edge_alias)
        assert relabeled.same_structure(r.fine)
        fixed = relabel_refinement(replayed_r, decomp.vertex_alias,
                                   decomp.edge_alias)
        assert fixed.vertex_map == r.vertex_map
        assert {eid: p.steps for eid, p in fixed.edge_map.items()} \
            == {eid: p.steps for eid, p in r.edge_map.items()}

    def test_single_subdivision(self, single_edge):
        _, r = apply_elementary(single_edge, SubdivideEdge(0, 2, 1, 2))
        self.roundtrip(single_edge, r)

    def test_multi_step(self, triangle):
        g1, r1 = apply_elementary(triangle, SubdivideEdge(0, 3, 10, 11))
        g2, r2 = apply_elementary(g1, SubdivideEdge(10, 4, 12, 13))
        g3, r3 = apply_elementary(
            g2, AddVertexEdge(vertex=5, edge=20, source=5, target=2))
        r = compose_refinements(compose_refinements(r1, r2), r3)
        self.roundtrip(triangle, r)

    def test_with_added_chord(self, star):
        g1, r1 = apply_elementary(star, AddEdge(edge=10, source=1, target=2))
        g2, r2 = apply_elementary(g1, SubdivideEdge(2, 9, 11, 12))
        r = compose_refinements(r1, r2)
        self.roundtrip(star, r)
