"""Electric Hamiltonians: Kronecker-lifted one-site Laplacians weighted by
per-edge moments of inertia, their gauge reduction, spectra, and the
compatibility law along refinements (inertia additivity over image paths).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from . import configspace as cs
from .errors import (
    BadFractions,
    BudgetExceeded,
    GraphMismatch,
    InertiaMismatch,
    MissingInertia,
    NotEquivariant,
)
from .graph import OrientedGraph, Refinement
from .group import (
    FiniteGroup,
    LaplacianSpec,
    StructureGroup,
    U1Truncated,
    default_laplacian_spec,
    group_size,
    one_site_laplacian,
)
from .hilbert import GaugeReduction, HilbertSpace, LinearMap, gauge_unitary, residual
from .reporting import ValidationReport


@dataclass(frozen=True)
class InertiaAssignment:
    """Positive moment of inertia per edge id."""

    values: Dict[int, float] = field(hash=False)

    def __post_init__(self) -> None:
        for eid, inertia in self.values.items():
            if not inertia > 0:
                raise MissingInertia("edge %r needs a positive inertia, got %r" % (eid, inertia))

    def on(self, edge_id: int) -> float:
        try:
            return self.values[edge_id]
        except KeyError:
            raise MissingInertia("edge %r has no inertia" % (edge_id,)) from None

    def covers(self, graph: OrientedGraph) -> bool:
        return set(self.values) >= set(graph.edge_ids)


def uniform_inertias(graph: OrientedGraph, value: float = 1.0) -> InertiaAssignment:
    return InertiaAssignment({eid: value for eid in graph.edge_ids})


@dataclass(frozen=True, eq=False)
class HamiltonianOp:
    """H = sum_e -(1/2) I_e D_e with D_e the one-site Laplacian on factor e."""

    space: HilbertSpace
    inertias: InertiaAssignment
    matrix: sp.spmatrix

    @property
    def dim(self) -> int:
        return self.space.dim

    def as_map(self) -> LinearMap:
        return LinearMap(self.space, self.space, self.matrix)

    @property
    def is_diagonal(self) -> bool:
        off = self.matrix - sp.diags(self.matrix.diagonal())
        return off.count_nonzero() == 0


def build_hamiltonian(space: HilbertSpace, inertias: InertiaAssignment,
                      spec: Optional[LaplacianSpec] = None, *,
                      enforce: bool = True) -> HamiltonianOp:
    """Assemble the electric Hamiltonian sparsely as a Kronecker sum."""
    graph = space.graph
    if not inertias.covers(graph):
        missing = sorted(set(graph.edge_ids) - set(inertias.values))
        raise MissingInertia("edges without inertia: %r" % (missing,))
    delta = one_site_laplacian(space.group, spec, enforce=enforce)
    site = sp.csr_matrix(delta)
    n_site = site.shape[0]
    n_edges = graph.num_edges
    total = sp.csr_matrix((space.dim, space.dim))
    for k, e in enumerate(graph.edges):
        left = n_site ** k
        right = n_site ** (n_edges - k - 1)
        lifted = sp.kron(sp.identity(left, format="csr"),
                         sp.kron(site, sp.identity(right, format="csr"), format="csr"),
                         format="csr")
        total = total + (-0.5 * inertias.on(e.id)) * lifted
    return HamiltonianOp(space, inertias, total.tocsr())


def split_inertias(r: Refinement, coarse: InertiaAssignment,
                   fractions: Optional[Dict[int, Sequence[float]]] = None,
                   new_inertias: Optional[Dict[int, float]] = None) -> InertiaAssignment:
    """Distribute coarse inertias over image paths so the path sums reproduce
    them exactly; added edges need explicit new inertias.

    Default split is equal fractions ("proportional to path length"); the
    last piece absorbs the rounding so the sum is exact in floating point.
    """
    fractions = fractions or {}
    new_inertias = new_inertias or {}
    fine_values: Dict[int, float] = {}
    for e in r.coarse.edges:
        path = r.edge_map[e.id]
        n = len(path.steps)
        total = coarse.on(e.id)
        if n == 1:
            fine_values[path.steps[0]] = total
            continue
        fracs = fractions.get(e.id)
        if fracs is None:
            fracs = [1.0 / n] * n
        fracs = list(fracs)
        if len(fracs) != n:
            raise BadFractions("edge %r splits into %d pieces, got %d fractions"
                               % (e.id, n, len(fracs)))
        if any(not f > 0 for f in fracs):
            raise BadFractions("fractions for edge %r must be positive" % (e.id,))
        if abs(sum(fracs) - 1.0) > 1e-12:
            raise BadFractions("fractions for edge %r sum to %r, not 1" % (e.id, sum(fracs)))
        pieces = [f * total for f in fracs[:-1]]
        pieces.append(total - sum(pieces))  # exact path sum
        if not pieces[-1] > 0:
            raise BadFractions("last fraction for edge %r leaves a nonpositive piece" % (e.id,))
        for step, piece in zip(path.steps, pieces):
            fine_values[step] = piece
    for e in r.fine.edges:
        if e.id in fine_values:
            continue
        if e.id not in new_inertias:
            raise MissingInertia("added edge %r needs an explicit inertia" % (e.id,))
        fine_values[e.id] = new_inertias[e.id]
    return InertiaAssignment(fine_values)


def verify_inertia_additivity(r: Refinement, coarse: InertiaAssignment,
                              fine: InertiaAssignment, tol: float = 0.0) -> None:
    for e in r.coarse.edges:
        path_sum = sum(fine.on(step) for step in r.edge_map[e.id].steps)
        if abs(path_sum - coarse.on(e.id)) > tol:
            raise InertiaMismatch(
                "edge %r: path sum %r differs from coarse inertia %r"
                % (e.id, path_sum, coarse.on(e.id)))


def check_equivariance(h: HamiltonianOp, *, tol: float = 1e-10,
                       angle_samples: int = 4, seed: int = 0) -> ValidationReport:
    """Commutators of H with the gauge unitaries.

    Finite backend: exhaustive over single-vertex insertions of every group
    element.  U(1) backend: sampled vertex phase assignments (H and the
    phase unitaries are simultaneously diagonal, so any sample suffices).
    """
    report = ValidationReport(subject="gauge equivariance of H")
    space = h.space
    graph = space.graph
    worst = 0.0
    if space.backend == "finite":
        group = space.group
        n_vertices = graph.num_vertices
        for vk in range(n_vertices):
            for g_val in range(1, group.order):
                values = [group.identity] * n_vertices
                values[vk] = g_val
                unitary = gauge_unitary(space, cs.GaugeElement(graph, tuple(values)))
                comm = h.matrix @ unitary.matrix - unitary.matrix @ h.matrix
                res = residual(comm)
                if res > worst:
                    worst = res
                if res > tol:
                    report.add("NotEquivariant",
                               "commutator norm %.3e at vertex slot %d, element %d"
                               % (res, vk, g_val))
    else:
        rng = np.random.default_rng(seed)
        report.info["seed"] = seed
        for _ in range(angle_samples):
            angles = tuple(float(x) for x in rng.uniform(0, 2 * np.pi, graph.num_vertices))
            unitary = gauge_unitary(space, cs.GaugeElement(graph, angles))
            comm = h.matrix @ unitary.matrix - unitary.matrix @ h.matrix
            worst = max(worst, residual(comm))
            if worst > tol:
                report.add("NotEquivariant", "commutator norm %.3e" % worst)
                break
    report.info["max_commutator"] = worst
    return report


def reduced_hamiltonian(h: HamiltonianOp, red: GaugeReduction, *,
                        tol: float = 1e-12, check: bool = True) -> HamiltonianOp:
    """H_red = p H p*; requires (and verifies) p H = H_red p."""
    h_red = (red.p.matrix @ h.matrix @ red.embed.matrix).tocsr()
    if check:
        defect = residual(red.p.matrix @ h.matrix - h_red @ red.p.matrix)
        if defect > tol:
            raise NotEquivariant(
                "reduction does not commute (residual %.3e); "
                "is the Laplacian generating set conjugation-closed?" % defect)
    return HamiltonianOp(red.reduced_space, h.inertias, h_red)


def check_refinement_compat(u: LinearMap, h_coarse: HamiltonianOp,
                            h_fine: HamiltonianOp, *, tol: float = 1e-10,
                            verify_inertias: bool = True,
                            refinement: Optional[Refinement] = None) -> ValidationReport:
    """Residual of H_fine u = u H_coarse (and implicitly the reduced face)."""
    report = ValidationReport(subject="refinement compatibility of H")
    if verify_inertias and refinement is not None:
        verify_inertia_additivity(refinement, h_coarse.inertias, h_fine.inertias,
                                  tol=1e-12)
    defect = residual(h_fine.matrix @ u.matrix - u.matrix @ h_coarse.matrix)
    report.info["residual"] = defect
    if defect > tol:
        report.add("NotIntertwining", "residual %.3e exceeds %.1e" % (defect, tol))
    return report


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues clustered into (value, multiplicity) pairs."""

    eigenvalues: Tuple[Tuple[float, int], ...]
    degeneracy_tol: float
    dim: int

    def flat(self) -> np.ndarray:
        return np.concatenate([[v] * m for v, m in self.eigenvalues]) \
            if self.eigenvalues else np.array([])

    def to_rows(self) -> List[Tuple[float, int]]:
        return [(v, m) for v, m in self.eigenvalues]


def cluster_eigenvalues(values: np.ndarray, tol: float) -> Tuple[Tuple[float, int], ...]:
    values = np.sort(np.asarray(values, dtype=float))
    clusters: List[Tuple[float, int]] = []
    for v in values:
        if clusters and abs(v - clusters[-1][0]) <= tol:
            prev, mult = clusters[-1]
            # keep the first representative; drift within tol is noise
            clusters[-1] = (prev, mult + 1)
        else:
            clusters.append((float(v), 1))
    return tuple(clusters)


def spectrum(h: HamiltonianOp, *, degeneracy_tol: float = 1e-8,
             dense_budget: int = 4096) -> Spectrum:
    """Eigenvalues of H: read off the diagonal when H is diagonal, dense
    symmetric diagonalization below the budget, error above it."""
    if h.is_diagonal:
        values = np.real(h.matrix.diagonal())
    elif h.dim <= dense_budget:
        values = np.linalg.eigvalsh(h.matrix.toarray())
    else:
        raise BudgetExceeded(
            "dimension %d exceeds the dense eigensolve budget %d and H is not diagonal"
            % (h.dim, dense_budget))
    floor = -1e-10
    if values.min() < floor:
        raise NotEquivariant("Hamiltonian has an eigenvalue %.3e below the PSD floor"
                             % values.min())
    values = np.clip(values, 0.0, None)
    return Spectrum(cluster_eigenvalues(values, degeneracy_tol), degeneracy_tol, h.dim)
