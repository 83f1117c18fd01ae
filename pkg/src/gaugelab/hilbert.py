"""Concrete L2 spaces over configuration bases, pullback isometries, gauge
unitaries, and the averaging projector onto gauge-invariant states.

Two backends share one interface: the finite-position basis (one basis point
per configuration, Haar weight 1/|G|^|E|) and the U(1) momentum basis (one
orthonormal basis vector per mode assignment, weight 1).  Reduced spaces are
represented intrinsically: orbit basis, or the sublattice of mode assignments
with zero net flux at every vertex.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from . import configspace as cs
from .errors import BackendUnsupported, CutoffMismatch, GraphMismatch, SpaceMismatch
from .graph import OrientedGraph, Refinement
from .group import FiniteGroup, StructureGroup, U1Truncated

MatrixLike = Union[np.ndarray, sp.spmatrix]


@dataclass(frozen=True, eq=False)
class HilbertSpace:
    """A finite-dimensional weighted L2 space over an explicit basis."""

    graph: OrientedGraph
    group: StructureGroup
    backend: str  # 'finite' | 'u1' | 'finite-red' | 'u1-red'
    dim: int
    weights: np.ndarray

    @property
    def is_reduced(self) -> bool:
        return self.backend.endswith("-red")

    def compatible(self, other: "HilbertSpace") -> bool:
        return (self.backend == other.backend and self.dim == other.dim
                and self.graph.same_structure(other.graph))

    def inner(self, phi: np.ndarray, psi: np.ndarray) -> complex:
        return complex(np.sum(self.weights * np.conj(phi) * psi))

    def norm(self, psi: np.ndarray) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(psi) ** 2).real))


@dataclass(frozen=True, eq=False)
class StateVector:
    space: HilbertSpace
    data: np.ndarray

    def norm(self) -> float:
        return self.space.norm(self.data)


def configuration_space(graph: OrientedGraph, group: StructureGroup) -> HilbertSpace:
    if isinstance(group, U1Truncated):
        dim = group.dim ** graph.num_edges
        return HilbertSpace(graph, group, "u1", dim, np.ones(dim))
    dim = group.order ** graph.num_edges
    return HilbertSpace(graph, group, "finite", dim, np.full(dim, 1.0 / dim))


# ---------------------------------------------------------------------------
# Mode bookkeeping for the U(1) backend


def mode_tuple(space: HilbertSpace, index: int) -> Tuple[int, ...]:
    group = space.group
    radix = group.dim
    digits = []
    for _ in range(space.graph.num_edges):
        index, d = divmod(index, radix)
        digits.append(d - group.cutoff)
    digits.reverse()
    return tuple(digits)


def mode_index(space: HilbertSpace, modes: Tuple[int, ...]) -> int:
    group = space.group
    index = 0
    for n in modes:
        index = index * group.dim + (n + group.cutoff)
    return index


def gauss_charges(graph: OrientedGraph, modes: Tuple[int, ...]) -> Tuple[int, ...]:
    """Net outgoing momentum at each vertex (sorted vertex order)."""
    charge = {v: 0 for v in graph.vertex_list}
    for e, n in zip(graph.edges, modes):
        charge[e.source] += n
        charge[e.target] -= n
    return tuple(charge[v] for v in graph.vertex_list)


# ---------------------------------------------------------------------------
# Linear maps with weighted adjoints


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear map between two spaces, as a matrix in their bases."""

    domain: HilbertSpace
    codomain: HilbertSpace
    matrix: MatrixLike

    def __post_init__(self) -> None:
        rows, cols = self.matrix.shape
        if rows != self.codomain.dim or cols != self.domain.dim:
            raise SpaceMismatch("matrix shape %r does not match spaces (%d, %d)"
                                % ((rows, cols), self.codomain.dim, self.domain.dim))

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def compose(self, other: "LinearMap") -> "LinearMap":
        """self after other."""
        if other.codomain.dim != self.domain.dim:
            raise SpaceMismatch("maps are not composable")
        return LinearMap(other.domain, self.codomain, self.matrix @ other.matrix)

    def adjoint(self) -> "LinearMap":
        """Adjoint with respect to the weighted inner products."""
        w_dom = self.domain.weights
        w_cod = self.codomain.weights
        mat = self.matrix.conj().T if sp.issparse(self.matrix) \
            else np.conj(self.matrix).T
        if sp.issparse(mat):
            mat = sp.diags(1.0 / w_dom) @ mat @ sp.diags(w_cod)
        else:
            mat = (1.0 / w_dom)[:, None] * mat * w_cod[None, :]
        return LinearMap(self.codomain, self.domain, mat)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.asarray(self.matrix)


def identity_map(space: HilbertSpace) -> LinearMap:
    return LinearMap(space, space, sp.identity(space.dim, format="csr"))


def residual(matrix: MatrixLike) -> float:
    """Max-abs entry, our default residual norm for diagram checks."""
    if sp.issparse(matrix):
        data = matrix.tocoo().data
        return float(np.max(np.abs(data))) if data.size else 0.0
    arr = np.asarray(matrix)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def isometry_defect(u: LinearMap) -> float:
    """Residual of u* u = identity on the domain."""
    prod = u.adjoint().compose(u).matrix
    eye = sp.identity(u.domain.dim, format="csr")
    return residual(prod - eye)


def operator_norm(m: LinearMap, *, dense_budget: int = 4096) -> float:
    """Largest singular value with respect to the weighted inner products."""
    a = np.sqrt(m.codomain.weights)[:, None] * m.dense() * \
        (1.0 / np.sqrt(m.domain.weights))[None, :]
    if max(a.shape) <= dense_budget:
        return float(np.linalg.svd(a, compute_uv=False)[0])
    # power iteration on a^H a
    rng = np.random.default_rng(0)
    x = rng.standard_normal(a.shape[1])
    x /= np.linalg.norm(x)
    val = 0.0
    for _ in range(200):
        y = np.conj(a.T) @ (a @ x)
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        x = y / nrm
        val = nrm
    return float(np.sqrt(val))


# ---------------------------------------------------------------------------
# Pullback isometries


def pullback_isometry(r: Refinement, coarse: HilbertSpace, fine: HilbertSpace) -> LinearMap:
    """The isometry psi -> psi o restrict from the coarse into the fine space.

    Finite backend: composition with the holonomy restriction.  U(1) backend:
    a subdivision duplicates the mode along the path and added edges carry
    mode 0, so the truncation is never exceeded.
    """
    if not coarse.graph.same_structure(r.coarse) or not fine.graph.same_structure(r.fine):
        raise GraphMismatch("spaces do not match the refinement's graphs")
    if coarse.backend != fine.backend:
        raise SpaceMismatch("backends differ: %s vs %s" % (coarse.backend, fine.backend))

    if coarse.backend == "finite":
        rmap = cs.restriction_index_map(coarse.group, r)
        mat = sp.csr_matrix(
            (np.ones(fine.dim), (np.arange(fine.dim), rmap)),
            shape=(fine.dim, coarse.dim))
        return LinearMap(coarse, fine, mat)

    if coarse.backend == "u1":
        if coarse.group.cutoff != fine.group.cutoff:
            raise CutoffMismatch("cutoffs differ: %d vs %d"
                                 % (coarse.group.cutoff, fine.group.cutoff))
        parent: Dict[int, int] = {}  # fine edge id -> coarse edge position
        for k, e in enumerate(r.coarse.edges):
            for step in r.edge_map[e.id].steps:
                parent[step] = k
        rows = np.empty(coarse.dim, dtype=np.int64)
        for cidx in range(coarse.dim):
            modes = mode_tuple(coarse, cidx)
            fine_modes = tuple(
                modes[parent[e.id]] if e.id in parent else 0 for e in r.fine.edges)
            rows[cidx] = mode_index(fine, fine_modes)
        mat = sp.csr_matrix(
            (np.ones(coarse.dim), (rows, np.arange(coarse.dim))),
            shape=(fine.dim, coarse.dim))
        return LinearMap(coarse, fine, mat)

    raise BackendUnsupported("pullback isometry is defined on full spaces only")


# ---------------------------------------------------------------------------
# Gauge unitaries


def gauge_unitary(space: HilbertSpace, g: cs.GaugeElement) -> LinearMap:
    """The unitary implementing the gauge transformation g on states.

    Finite backend: the basis permutation psi -> psi o (g^-1 . ).  U(1)
    backend: diagonal phases determined by the net-flux charges, so every
    mode basis vector is an eigenvector.  Satisfies U(g)U(h) = U(gh).
    """
    if not g.graph.same_structure(space.graph):
        raise GraphMismatch("gauge element lives on a different graph")

    if space.backend == "finite":
        group = space.group
        ginv = cs.gauge_inv(space.graph, group, g)
        cols = np.empty(space.dim, dtype=np.int64)
        for idx in range(space.dim):
            a = cs.index_to_config(space.graph, group, idx)
            cols[idx] = cs.config_to_index(cs.gauge_act(group, ginv, a), group)
        mat = sp.csr_matrix(
            (np.ones(space.dim), (np.arange(space.dim), cols)),
            shape=(space.dim, space.dim))
        return LinearMap(space, space, mat)

    if space.backend == "u1":
        angles = np.asarray(g.values, dtype=float)
        phases = np.empty(space.dim, dtype=complex)
        for idx in range(space.dim):
            q = gauss_charges(space.graph, mode_tuple(space, idx))
            phases[idx] = np.exp(-1j * float(np.dot(q, angles)))
        return LinearMap(space, space, sp.diags(phases).tocsr())

    raise BackendUnsupported("gauge unitaries act on full spaces only")


# ---------------------------------------------------------------------------
# Gauge reduction


@dataclass(frozen=True, eq=False)
class GaugeReduction:
    """The averaging map p onto the reduced space and its isometric section."""

    space: HilbertSpace
    reduced_space: HilbertSpace
    p: LinearMap        # H -> H_red, averaging
    embed: LinearMap    # H_red -> H, the pullback of the quotient map
    orbit_table: Optional[cs.OrbitTable] = None       # finite backend
    gauss_indices: Optional[Tuple[int, ...]] = None   # u1 backend

    @property
    def invariant_projector(self) -> LinearMap:
        """Orthogonal projection of H onto the gauge-invariant subspace."""
        return self.embed.compose(self.p)


def invariant_projector(space: HilbertSpace, *, budget: int = 1 << 16) -> GaugeReduction:
    """Build the reduced space, the averaging map p, and its section.

    Finite backend: one reduced basis vector per gauge orbit; p takes the
    gauge-group average, which equals the orbit mean.  U(1) backend: the
    reduced basis is the set of mode assignments with zero net flux at every
    vertex; p is the coordinate selection.
    """
    if space.backend == "finite":
        table = cs.orbits(space.graph, space.group, budget=budget)
        n_red = len(table.orbits)
        red_weights = np.array([float(orb.size) / table.total for orb in table.orbits])
        reduced = HilbertSpace(space.graph, space.group, "finite-red", n_red, red_weights)
        rows, cols, vals = [], [], []
        for k, orb in enumerate(table.orbits):
            for i in orb.indices:
                rows.append(k)
                cols.append(i)
                vals.append(1.0 / orb.size)
        p_mat = sp.csr_matrix((vals, (rows, cols)), shape=(n_red, space.dim))
        embed_mat = sp.csr_matrix(
            (np.ones(space.dim), (np.arange(space.dim), np.asarray(table.orbit_of))),
            shape=(space.dim, n_red))
        return GaugeReduction(space, reduced,
                              LinearMap(space, reduced, p_mat),
                              LinearMap(reduced, space, embed_mat),
                              orbit_table=table)

    if space.backend == "u1":
        gauss = tuple(
            idx for idx in range(space.dim)
            if all(q == 0 for q in gauss_charges(space.graph, mode_tuple(space, idx))))
        n_red = len(gauss)
        reduced = HilbertSpace(space.graph, space.group, "u1-red", n_red, np.ones(n_red))
        p_mat = sp.csr_matrix(
            (np.ones(n_red), (np.arange(n_red), np.asarray(gauss, dtype=np.int64))),
            shape=(n_red, space.dim))
        return GaugeReduction(space, reduced,
                              LinearMap(space, reduced, p_mat),
                              LinearMap(reduced, space, p_mat.T.tocsr()),
                              gauss_indices=gauss)

    raise BackendUnsupported("cannot reduce an already reduced space")


def reduced_isometry(r: Refinement, red_coarse: GaugeReduction,
                     red_fine: GaugeReduction, u: LinearMap) -> LinearMap:
    """u_red = p_fine o u o embed_coarse between the reduced spaces."""
    if u.domain is not red_coarse.space and not u.domain.compatible(red_coarse.space):
        raise GraphMismatch("isometry domain does not match the coarse reduction")
    return red_fine.p.compose(u).compose(red_coarse.embed)


# ---------------------------------------------------------------------------
# Columnar export


def to_columnar(array: np.ndarray) -> str:
    """Serialize a vector as 'index re im' lines, or a matrix as
    'row col re im' lines, one basis entry per line."""
    arr = np.asarray(array)
    buf = io.StringIO()
    if arr.ndim == 1:
        buf.write("# index re im\n")
        for i, z in enumerate(arr):
            z = complex(z)
            buf.write("%d %r %r\n" % (i, z.real, z.imag))
    elif arr.ndim == 2:
        buf.write("# row col re im\n")
        for i in range(arr.shape[0]):
            for j in range(arr.shape[1]):
                z = complex(arr[i, j])
                buf.write("%d %d %r %r\n" % (i, j, z.real, z.imag))
    else:
        raise ValueError("only vectors and matrices export")
    return buf.getvalue()
