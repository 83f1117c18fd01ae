"""Oriented graphs, orientation-respecting paths, refinements, and the
elementary-step calculus (edge addition, pendant vertex, edge subdivision).

Vertex and edge identifiers are opaque non-negative integers in two separate
namespaces.  All values are immutable after construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Tuple, Union

from .errors import (
    GraphMismatch,
    InvalidPath,
    MissingReference,
    WouldViolateAssumption,
)
from .reporting import ValidationReport


@dataclass(frozen=True)
class Edge:
    id: int
    source: int
    target: int

    def endpoints(self) -> frozenset:
        return frozenset((self.source, self.target))


@dataclass(frozen=True)
class OrientedGraph:
    """A finite oriented graph: no self-loops, no parallel edges, connected."""

    vertices: frozenset
    edges: Tuple[Edge, ...]

    @cached_property
    def vertex_list(self) -> Tuple[int, ...]:
        return tuple(sorted(self.vertices))

    @cached_property
    def edge_ids(self) -> Tuple[int, ...]:
        return tuple(e.id for e in self.edges)

    @cached_property
    def _edges_by_id(self) -> Dict[int, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def _edge_index(self) -> Dict[int, int]:
        return {e.id: k for k, e in enumerate(self.edges)}

    def edge(self, edge_id: int) -> Edge:
        try:
            return self._edges_by_id[edge_id]
        except KeyError:
            raise MissingReference("edge %r not in graph" % (edge_id,)) from None

    def edge_position(self, edge_id: int) -> int:
        """Index of an edge in the canonical edge order (tensor-factor slot)."""
        try:
            return self._edge_index[edge_id]
        except KeyError:
            raise MissingReference("edge %r not in graph" % (edge_id,)) from None

    def has_vertex(self, v: int) -> bool:
        return v in self.vertices

    def edge_between(self, u: int, v: int) -> Optional[Edge]:
        """The unique edge joining u and v in either orientation, if any."""
        pair = frozenset((u, v))
        for e in self.edges:
            if e.endpoints() == pair:
                return e
        return None

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def same_structure(self, other: "OrientedGraph") -> bool:
        return self.vertices == other.vertices and set(self.edges) == set(other.edges)


def make_graph(vertices: Iterable[int], edges: Iterable[Tuple[int, int, int]]) -> OrientedGraph:
    """Build a graph from vertex ids and (edge_id, source, target) triples.

    Raises if the result violates any structural clause; use
    :func:`validate_graph` to obtain a report instead.
    """
    g = OrientedGraph(frozenset(vertices), tuple(Edge(i, s, t) for i, s, t in edges))
    report = validate_graph(g)
    if not report.ok:
        raise WouldViolateAssumption(report.summary())
    return g


def validate_graph(g: OrientedGraph) -> ValidationReport:
    """Check the three structural clauses: no self-loops, no parallel edges,
    connected as an unoriented graph.  Also flags dangling endpoints and
    duplicate identifiers."""
    report = ValidationReport(subject="graph")
    seen_edge_ids = set()
    for e in g.edges:
        if e.id in seen_edge_ids:
            report.add("DuplicateEdgeId", "edge id %r used twice" % (e.id,))
        seen_edge_ids.add(e.id)
        if e.source == e.target:
            report.add("SelfLoop", "edge %r has source = target = %r" % (e.id, e.source))
        for v in (e.source, e.target):
            if v not in g.vertices:
                report.add("DanglingEndpoint", "edge %r endpoint %r is not a vertex" % (e.id, v))
    pairs: Dict[frozenset, int] = {}
    for e in g.edges:
        if e.source == e.target:
            continue
        pair = e.endpoints()
        if pair in pairs:
            report.add("ParallelEdge",
                       "edges %r and %r join the same vertex pair" % (pairs[pair], e.id))
        else:
            pairs[pair] = e.id
    if g.vertices and not _connected(g):
        report.add("NotConnected", "underlying unoriented graph has more than one component")
    return report


def _connected(g: OrientedGraph) -> bool:
    adjacency: Dict[int, List[int]] = {v: [] for v in g.vertices}
    for e in g.edges:
        if e.source in adjacency and e.target in adjacency:
            adjacency[e.source].append(e.target)
            adjacency[e.target].append(e.source)
    start = next(iter(g.vertices))
    seen = {start}
    stack = [start]
    while stack:
        for w in adjacency[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(g.vertices)


# ---------------------------------------------------------------------------
# Paths


@dataclass(frozen=True)
class GraphPath:
    """An orientation-respecting path; the empty path carries its anchor."""

    base: OrientedGraph
    steps: Tuple[int, ...]
    anchor: int  # start vertex (= source of first step when nonempty)

    @property
    def is_empty(self) -> bool:
        return not self.steps

    @property
    def start(self) -> int:
        return self.anchor

    @property
    def end(self) -> int:
        if self.is_empty:
            return self.anchor
        return self.base.edge(self.steps[-1]).target


def make_path(base: OrientedGraph, steps: Iterable[int], anchor: Optional[int] = None) -> GraphPath:
    steps = tuple(steps)
    if not steps:
        if anchor is None or anchor not in base.vertices:
            raise InvalidPath("empty path needs an anchor vertex in the graph")
        return GraphPath(base, (), anchor)
    edges = [base.edge(s) for s in steps]
    for prev, nxt in zip(edges, edges[1:]):
        if prev.target != nxt.source:
            raise InvalidPath(
                "edge %r (target %r) is not composable with edge %r (source %r)"
                % (prev.id, prev.target, nxt.id, nxt.source))
    start = edges[0].source
    if anchor is not None and anchor != start:
        raise InvalidPath("anchor %r disagrees with path start %r" % (anchor, start))
    return GraphPath(base, steps, start)


def concat_paths(p: GraphPath, q: GraphPath) -> GraphPath:
    if p.base is not q.base and not p.base.same_structure(q.base):
        raise InvalidPath("paths live in different graphs")
    if p.end != q.start:
        raise InvalidPath("paths are not composable: %r != %r" % (p.end, q.start))
    return make_path(p.base, p.steps + q.steps, anchor=p.start)


# ---------------------------------------------------------------------------
# Refinements


@dataclass(frozen=True)
class Refinement:
    """An embedding of ``coarse`` into ``fine``: an injective vertex map and
    an edge-to-path map with pairwise edge-disjoint, nonempty images."""

    coarse: OrientedGraph
    fine: OrientedGraph
    vertex_map: Dict[int, int] = field(compare=True, hash=False)
    edge_map: Dict[int, GraphPath] = field(compare=True, hash=False)

    def image_path(self, edge_id: int) -> GraphPath:
        try:
            return self.edge_map[edge_id]
        except KeyError:
            raise MissingReference("coarse edge %r has no image path" % (edge_id,)) from None


def make_refinement(coarse: OrientedGraph, fine: OrientedGraph,
                    vertex_map: Dict[int, int],
                    edge_map: Dict[int, GraphPath]) -> Refinement:
    """Validate the refinement invariants and build the record."""
    if set(vertex_map) != set(coarse.vertices):
        raise MissingReference("vertex map must cover exactly the coarse vertices")
    images = list(vertex_map.values())
    if len(set(images)) != len(images):
        raise WouldViolateAssumption("vertex map is not injective")
    for v, w in vertex_map.items():
        if w not in fine.vertices:
            raise MissingReference("vertex image %r not in fine graph" % (w,))
    if set(edge_map) != set(coarse.edge_ids):
        raise MissingReference("edge map must cover exactly the coarse edges")
    used_fine_edges = set()
    for eid, path in edge_map.items():
        if path.is_empty:
            raise WouldViolateAssumption("edge %r maps to an empty path" % (eid,))
        if not path.base.same_structure(fine):
            raise GraphMismatch("image path of edge %r lives in the wrong graph" % (eid,))
        e = coarse.edge(eid)
        if path.start != vertex_map[e.source] or path.end != vertex_map[e.target]:
            raise WouldViolateAssumption(
                "image path of edge %r does not join the images of its endpoints" % (eid,))
        overlap = used_fine_edges.intersection(path.steps)
        if overlap:
            raise WouldViolateAssumption(
                "image paths share fine edges %r" % (sorted(overlap),))
        used_fine_edges.update(path.steps)
    return Refinement(coarse, fine, dict(vertex_map), dict(edge_map))


def identity_refinement(g: OrientedGraph) -> Refinement:
    return Refinement(
        g, g,
        {v: v for v in g.vertices},
        {e.id: GraphPath(g, (e.id,), e.source) for e in g.edges},
    )


def compose_refinements(r1: Refinement, r2: Refinement) -> Refinement:
    """Compose coarse->mid with mid->fine into coarse->fine."""
    if not r1.fine.same_structure(r2.coarse):
        raise GraphMismatch("first refinement's fine graph differs from second's coarse graph")
    vertex_map = {v: r2.vertex_map[w] for v, w in r1.vertex_map.items()}
    edge_map = {}
    for eid, path in r1.edge_map.items():
        segments = [r2.edge_map[s] for s in path.steps]
        steps: Tuple[int, ...] = ()
        for seg in segments:
            steps = steps + seg.steps
        edge_map[eid] = make_path(r2.fine, steps)
    return Refinement(r1.coarse, r2.fine, vertex_map, edge_map)


def map_path(r: Refinement, p: GraphPath) -> GraphPath:
    """Image of a coarse path: concatenation of the images of its steps.

    Respects concatenation and sends the empty path at v to the empty path
    at the image of v.
    """
    if not p.base.same_structure(r.coarse):
        raise InvalidPath("path does not live in the coarse graph")
    if p.is_empty:
        return GraphPath(r.fine, (), r.vertex_map[p.anchor])
    steps: Tuple[int, ...] = ()
    for s in p.steps:
        steps = steps + r.edge_map[s].steps
    return make_path(r.fine, steps)


# ---------------------------------------------------------------------------
# Elementary steps


@dataclass(frozen=True)
class AddEdge:
    """Add a new edge between two existing vertices."""

    edge: int
    source: int
    target: int


@dataclass(frozen=True)
class AddVertexEdge:
    """Add a new vertex together with one incident new edge.

    Exactly one of ``source``/``target`` must equal ``vertex``; the other is
    the existing anchor, so the orientation of the pendant edge is explicit.
    """

    vertex: int
    edge: int
    source: int
    target: int


@dataclass(frozen=True)
class SubdivideEdge:
    """Replace an edge by two edges through a new interior vertex."""

    edge: int
    vertex: int
    first: int
    second: int


ElementaryStep = Union[AddEdge, AddVertexEdge, SubdivideEdge]


def apply_elementary(g: OrientedGraph, step: ElementaryStep) -> Tuple[OrientedGraph, Refinement]:
    """Apply one elementary step, returning the refined graph together with
    the single-step refinement into it."""
    if isinstance(step, AddEdge):
        for v in (step.source, step.target):
            if v not in g.vertices:
                raise MissingReference("vertex %r not in graph" % (v,))
        if step.source == step.target:
            raise WouldViolateAssumption("added edge would be a self-loop")
        if g.edge_between(step.source, step.target) is not None:
            raise WouldViolateAssumption(
                "added edge would parallel an existing edge between %r and %r"
                % (step.source, step.target))
        _require_fresh_edge(g, step.edge)
        fine = OrientedGraph(g.vertices, g.edges + (Edge(step.edge, step.source, step.target),))
        return fine, _inclusion_refinement(g, fine)

    if isinstance(step, AddVertexEdge):
        if step.vertex in g.vertices:
            raise WouldViolateAssumption("vertex id %r already in use" % (step.vertex,))
        endpoints = {step.source, step.target}
        if step.vertex not in endpoints:
            raise MissingReference("pendant edge must be incident to the new vertex")
        anchor = (endpoints - {step.vertex}).pop() if len(endpoints) == 2 else None
        if anchor is None or anchor not in g.vertices:
            raise MissingReference("pendant edge anchor %r not in graph" % (anchor,))
        _require_fresh_edge(g, step.edge)
        fine = OrientedGraph(
            g.vertices | {step.vertex},
            g.edges + (Edge(step.edge, step.source, step.target),),
        )
        return fine, _inclusion_refinement(g, fine)

    if isinstance(step, SubdivideEdge):
        old = g.edge(step.edge)
        if step.vertex in g.vertices:
            raise WouldViolateAssumption("vertex id %r already in use" % (step.vertex,))
        for eid in (step.first, step.second):
            if eid != step.edge:
                _require_fresh_edge(g, eid)
        if step.first == step.second:
            raise WouldViolateAssumption("replacement edges need distinct ids")
        new_edges = []
        for e in g.edges:
            if e.id == step.edge:
                new_edges.append(Edge(step.first, old.source, step.vertex))
                new_edges.append(Edge(step.second, step.vertex, old.target))
            else:
                new_edges.append(e)
        fine = OrientedGraph(g.vertices | {step.vertex}, tuple(new_edges))
        vertex_map = {v: v for v in g.vertices}
        edge_map = {}
        for e in g.edges:
            if e.id == step.edge:
                edge_map[e.id] = make_path(fine, (step.first, step.second))
            else:
                edge_map[e.id] = make_path(fine, (e.id,))
        return fine, Refinement(g, fine, vertex_map, edge_map)

    raise TypeError("not an elementary step: %r" % (step,))


def _require_fresh_edge(g: OrientedGraph, edge_id: int) -> None:
    if edge_id in g._edges_by_id:
        raise WouldViolateAssumption("edge id %r already in use" % (edge_id,))


def _inclusion_refinement(coarse: OrientedGraph, fine: OrientedGraph) -> Refinement:
    return Refinement(
        coarse, fine,
        {v: v for v in coarse.vertices},
        {e.id: make_path(fine, (e.id,)) for e in coarse.edges},
    )


# ---------------------------------------------------------------------------
# Decomposition into elementary steps


@dataclass(frozen=True)
class Decomposition:
    """An elementary-step factorization of a refinement.

    Replaying ``steps`` from the coarse graph yields a graph isomorphic to
    the fine one; ``vertex_alias``/``edge_alias`` give the canonical
    relabeling (replay identifier -> fine identifier) induced by the steps.
    """

    steps: Tuple[ElementaryStep, ...]
    vertex_alias: Dict[int, int] = field(hash=False)
    edge_alias: Dict[int, int] = field(hash=False)


def decompose_elementary(r: Refinement) -> Decomposition:
    """Factor a refinement into subdivisions followed by edge/vertex additions.

    The returned decomposition is one valid factorization; only its replayed
    composite is canonical, not the step order.
    """
    work = r.coarse
    vertex_alias: Dict[int, int] = {v: r.vertex_map[v] for v in r.coarse.vertices}
    edge_alias: Dict[int, int] = {}
    steps: List[ElementaryStep] = []

    all_vids = set(work.vertices) | set(r.fine.vertices)
    all_eids = set(work.edge_ids) | set(r.fine.edge_ids)
    fresh_vertex = itertools.count(max(all_vids, default=-1) + 1)
    fresh_edge = itertools.count(max(all_eids, default=-1) + 1)

    def pick_vertex(fine_id: int) -> int:
        rid = fine_id if fine_id not in work.vertices else next(fresh_vertex)
        vertex_alias[rid] = fine_id
        return rid

    def pick_edge(fine_id: int) -> int:
        rid = fine_id if fine_id not in work._edges_by_id else next(fresh_edge)
        edge_alias[rid] = fine_id
        return rid

    # Phase 1: subdivide every coarse edge into its image path.
    for e in r.coarse.edges:
        path = r.edge_map[e.id]
        n = len(path.steps)
        if n == 1:
            edge_alias[e.id] = path.steps[0]
            continue
        current = e.id
        for k in range(n - 1):
            fine_first = path.steps[k]
            interior = r.fine.edge(fine_first).target
            rv = pick_vertex(interior)
            re1 = pick_edge(fine_first)
            if k < n - 2:
                re2 = next(fresh_edge)  # temporary tail, split again next round
            else:
                last = path.steps[-1]
                re2 = last if (last not in work._edges_by_id and last != re1) \
                    else next(fresh_edge)
                edge_alias[re2] = last
            step = SubdivideEdge(edge=current, vertex=rv, first=re1, second=re2)
            work, _ = apply_elementary(work, step)
            steps.append(step)
            current = re2

    # Phase 2: grow the remaining fine vertices and edges outward.
    realized = set(vertex_alias.values())
    placed_edges = set(edge_alias.values())
    inverse_v = {fid: rid for rid, fid in vertex_alias.items()}
    pending = [e for e in r.fine.edges if e.id not in placed_edges]
    while pending:
        progressed = False
        still = []
        for e in pending:
            src_in = e.source in realized
            tgt_in = e.target in realized
            if not (src_in or tgt_in):
                still.append(e)
                continue
            re = pick_edge(e.id)
            if src_in and tgt_in:
                step: ElementaryStep = AddEdge(
                    edge=re, source=inverse_v[e.source], target=inverse_v[e.target])
            else:
                new_fine = e.target if src_in else e.source
                rv = pick_vertex(new_fine)
                inverse_v[new_fine] = rv
                realized.add(new_fine)
                src = inverse_v[e.source] if src_in else rv
                tgt = rv if src_in else inverse_v[e.target]
                step = AddVertexEdge(vertex=rv, edge=re, source=src, target=tgt)
            work, _ = apply_elementary(work, step)
            steps.append(step)
            progressed = True
        pending = still
        if pending and not progressed:
            raise WouldViolateAssumption(
                "fine graph has edges unreachable from the image of the coarse graph")

    return Decomposition(tuple(steps), vertex_alias, edge_alias)


def replay(coarse: OrientedGraph, steps: Iterable[ElementaryStep]) -> Tuple[OrientedGraph, Refinement]:
    """Apply a sequence of elementary steps and compose the resulting
    single-step refinements."""
    current = coarse
    composed = identity_refinement(coarse)
    for step in steps:
        current, single = apply_elementary(current, step)
        composed = compose_refinements(composed, single)
    return current, composed


def relabel_graph(g: OrientedGraph, vertex_alias: Dict[int, int],
                  edge_alias: Dict[int, int]) -> OrientedGraph:
    """Rename vertices and edges along alias maps (identity where absent)."""
    vmap = lambda v: vertex_alias.get(v, v)
    emap = lambda e: edge_alias.get(e, e)
    return OrientedGraph(
        frozenset(vmap(v) for v in g.vertices),
        tuple(Edge(emap(e.id), vmap(e.source), vmap(e.target)) for e in g.edges),
    )


def relabel_refinement(r: Refinement, vertex_alias: Dict[int, int],
                       edge_alias: Dict[int, int]) -> Refinement:
    """Rename the fine side of a refinement along alias maps."""
    fine = relabel_graph(r.fine, vertex_alias, edge_alias)
    vmap = {v: vertex_alias.get(w, w) for v, w in r.vertex_map.items()}
    emap = {
        eid: make_path(fine, tuple(edge_alias.get(s, s) for s in path.steps))
        for eid, path in r.edge_map.items()
    }
    return Refinement(r.coarse, fine, vmap, emap)
