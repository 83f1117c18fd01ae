"""Configuration spaces G^(edges), gauge groups G^(vertices) with their
action, holonomy restriction along refinements, and gauge orbits.

Finite-group configurations are encoded as mixed-radix integers over the
graph's edge order (first edge most significant), matching the tensor-factor
order used for operators.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BackendUnsupported, BudgetExceeded, GraphMismatch
from .graph import OrientedGraph, Refinement
from .group import FiniteGroup, StructureGroup, U1Truncated
from .reporting import ValidationReport


@dataclass(frozen=True)
class Configuration:
    """Assignment of a group element index to every edge, in edge order."""

    graph: OrientedGraph
    values: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.graph.num_edges:
            raise GraphMismatch("configuration must assign every edge")

    def value_on(self, edge_id: int) -> int:
        return self.values[self.graph.edge_position(edge_id)]


@dataclass(frozen=True)
class GaugeElement:
    """Assignment of a group element index to every vertex, in sorted
    vertex order (or an angle per vertex for the U(1) backend)."""

    graph: OrientedGraph
    values: Tuple

    def __post_init__(self) -> None:
        if len(self.values) != self.graph.num_vertices:
            raise GraphMismatch("gauge element must assign every vertex")

    def value_at(self, vertex: int) -> float:
        return self.values[self.graph.vertex_list.index(vertex)]


def num_configurations(graph: OrientedGraph, group: FiniteGroup) -> int:
    return group.order ** graph.num_edges


def config_to_index(config: Configuration, group: FiniteGroup) -> int:
    index = 0
    for v in config.values:
        index = index * group.order + v
    return index


def index_to_config(graph: OrientedGraph, group: FiniteGroup, index: int) -> Configuration:
    values = []
    for _ in range(graph.num_edges):
        index, v = divmod(index, group.order)
        values.append(v)
    values.reverse()
    return Configuration(graph, tuple(values))


def all_configurations(graph: OrientedGraph, group: FiniteGroup):
    for values in itertools.product(range(group.order), repeat=graph.num_edges):
        yield Configuration(graph, values)


def all_gauge_elements(graph: OrientedGraph, group: FiniteGroup):
    for values in itertools.product(range(group.order), repeat=graph.num_vertices):
        yield GaugeElement(graph, values)


def identity_gauge(graph: OrientedGraph, group: FiniteGroup) -> GaugeElement:
    return GaugeElement(graph, (group.identity,) * graph.num_vertices)


def gauge_mul(graph: OrientedGraph, group: FiniteGroup,
              g: GaugeElement, h: GaugeElement) -> GaugeElement:
    return GaugeElement(graph, tuple(group.mul(a, b) for a, b in zip(g.values, h.values)))


def gauge_inv(graph: OrientedGraph, group: FiniteGroup, g: GaugeElement) -> GaugeElement:
    return GaugeElement(graph, tuple(group.inv(a) for a in g.values))


def gauge_act(group: FiniteGroup, g: GaugeElement, a: Configuration) -> Configuration:
    """Left action: the edge value becomes g_source * a_e * g_target^-1."""
    if not g.graph.same_structure(a.graph):
        raise GraphMismatch("gauge element and configuration live on different graphs")
    graph = a.graph
    vpos = {v: k for k, v in enumerate(graph.vertex_list)}
    new_values = []
    for e, val in zip(graph.edges, a.values):
        gs = g.values[vpos[e.source]]
        gt = g.values[vpos[e.target]]
        new_values.append(group.mul(group.mul(gs, val), group.inv(gt)))
    return Configuration(graph, tuple(new_values))


def restrict(group: FiniteGroup, r: Refinement, a_fine: Configuration) -> Configuration:
    """Holonomy restriction: each coarse edge gets the ordered product of the
    fine values along its image path; added edges are dropped."""
    if isinstance(group, U1Truncated):
        raise BackendUnsupported("U(1) restriction is realized on states, not points")
    if not a_fine.graph.same_structure(r.fine):
        raise GraphMismatch("configuration does not live on the fine graph")
    values = []
    for e in r.coarse.edges:
        path = r.edge_map[e.id]
        prod = group.identity
        for step in path.steps:
            prod = group.mul(prod, a_fine.value_on(step))
        values.append(prod)
    return Configuration(r.coarse, tuple(values))


def restrict_gauge(r: Refinement, g_fine: GaugeElement) -> GaugeElement:
    """Pull a fine gauge element back along the vertex injection."""
    if not g_fine.graph.same_structure(r.fine):
        raise GraphMismatch("gauge element does not live on the fine graph")
    fine_pos = {v: k for k, v in enumerate(r.fine.vertex_list)}
    values = tuple(g_fine.values[fine_pos[r.vertex_map[v]]] for v in r.coarse.vertex_list)
    return GaugeElement(r.coarse, values)


def check_equivariance(group: FiniteGroup, r: Refinement, *,
                       budget: int = 200_000, seed: int = 0) -> ValidationReport:
    """Verify restrict(g . a) = restrict_gauge(g) . restrict(a).

    Exhaustive when |gauge group| * |configurations| fits the budget,
    otherwise a seeded random sample with reported coverage.
    """
    report = ValidationReport(subject="equivariance of restriction")
    n_gauge = group.order ** r.fine.num_vertices
    n_conf = group.order ** r.fine.num_edges
    total = n_gauge * n_conf

    def check_pair(g: GaugeElement, a: Configuration) -> bool:
        lhs = restrict(group, r, gauge_act(group, g, a))
        rhs = gauge_act(group, restrict_gauge(r, g), restrict(group, r, a))
        if lhs != rhs:
            report.add("NotEquivariant",
                       "counterexample gauge=%r config=%r" % (g.values, a.values))
            return False
        return True

    if total <= budget:
        report.info["mode"] = "exhaustive"
        report.info["pairs"] = total
        for g in all_gauge_elements(r.fine, group):
            for a in all_configurations(r.fine, group):
                if not check_pair(g, a):
                    return report
    else:
        rng = np.random.default_rng(seed)
        samples = min(budget, 10_000)
        report.info.update({"mode": "sampled", "pairs": samples,
                            "coverage": samples / total, "seed": seed})
        for _ in range(samples):
            g = GaugeElement(r.fine, tuple(
                int(x) for x in rng.integers(0, group.order, r.fine.num_vertices)))
            a = Configuration(r.fine, tuple(
                int(x) for x in rng.integers(0, group.order, r.fine.num_edges)))
            if not check_pair(g, a):
                return report
    return report


# ---------------------------------------------------------------------------
# Orbits


@dataclass(frozen=True)
class Orbit:
    representative: Configuration
    indices: Tuple[int, ...]  # configuration indices, sorted

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class OrbitTable:
    graph: OrientedGraph
    group_order: int
    orbits: Tuple[Orbit, ...]

    @property
    def total(self) -> int:
        return self.group_order ** self.graph.num_edges

    @property
    def orbit_of(self) -> Tuple[int, ...]:
        # lazy-ish: recomputed per access is fine at these sizes
        lookup = [0] * self.total
        for k, orb in enumerate(self.orbits):
            for i in orb.indices:
                lookup[i] = k
        return tuple(lookup)

    def masses(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(orb.size, self.total) for orb in self.orbits)

    def to_dict(self) -> dict:
        return {
            "orbit_count": len(self.orbits),
            "total_configurations": self.total,
            "orbits": [
                {"index": k, "representative": list(o.representative.values), "size": o.size}
                for k, o in enumerate(self.orbits)
            ],
        }


def orbits(graph: OrientedGraph, group: FiniteGroup, *, budget: int = 1 << 16) -> OrbitTable:
    """Partition the configuration set into gauge orbits by union-find over
    single-vertex gauge moves.  Burnside's lemma is kept as an independent
    oracle in :func:`burnside_orbit_count`."""
    total = num_configurations(graph, group)
    if total > budget:
        raise BudgetExceeded("|G|^|E| = %d exceeds budget %d" % (total, budget))

    parent = list(range(total))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    vlist = graph.vertex_list
    for idx in range(total):
        a = index_to_config(graph, group, idx)
        for vk in range(len(vlist)):
            for g_val in range(1, group.order):
                values = [group.identity] * len(vlist)
                values[vk] = g_val
                moved = gauge_act(group, GaugeElement(graph, tuple(values)), a)
                union(idx, config_to_index(moved, group))

    members: Dict[int, List[int]] = {}
    for idx in range(total):
        members.setdefault(find(idx), []).append(idx)
    orbs = []
    for root in sorted(members):
        idxs = tuple(sorted(members[root]))
        orbs.append(Orbit(index_to_config(graph, group, idxs[0]), idxs))
    return OrbitTable(graph, group.order, tuple(orbs))


def burnside_orbit_count(graph: OrientedGraph, group: FiniteGroup, *,
                         budget: int = 1 << 22) -> int:
    """Independent orbit-count oracle: average number of fixed configurations
    over the whole gauge group."""
    n_gauge = group.order ** graph.num_vertices
    total = num_configurations(graph, group)
    if n_gauge * total > budget:
        raise BudgetExceeded("Burnside enumeration of %d pairs exceeds budget" % (n_gauge * total))
    fixed_sum = 0
    configs = list(all_configurations(graph, group))
    for g in all_gauge_elements(graph, group):
        fixed_sum += sum(1 for a in configs if gauge_act(group, g, a) == a)
    count, remainder = divmod(fixed_sum, n_gauge)
    if remainder:
        raise AssertionError("Burnside sum not divisible by the gauge group order")
    return count


def restriction_index_map(group: FiniteGroup, r: Refinement) -> np.ndarray:
    """For every fine configuration index, the index of its restriction."""
    n_fine = num_configurations(r.fine, group)
    out = np.empty(n_fine, dtype=np.int64)
    for idx in range(n_fine):
        a = index_to_config(r.fine, group, idx)
        out[idx] = config_to_index(restrict(group, r, a), group)
    return out
