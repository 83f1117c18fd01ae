"""Refinement towers: chains of graphs with all connecting maps built, a
one-shot verification suite for every structural law, exact (rational)
measure pushforward checks, projective sampling, and spectral flow tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from . import algebra as alg
from . import configspace as cs
from . import hamiltonian as ham
from .errors import BackendUnsupported, BudgetExceeded, StepInvalid
from .graph import (
    ElementaryStep,
    OrientedGraph,
    Refinement,
    SubdivideEdge,
    apply_elementary,
    compose_refinements,
)
from .group import LaplacianSpec, StructureGroup, U1Truncated
from .hilbert import (
    GaugeReduction,
    HilbertSpace,
    LinearMap,
    configuration_space,
    invariant_projector,
    isometry_defect,
    pullback_isometry,
    reduced_isometry,
    residual,
)
from .reporting import VerificationReport


@dataclass(frozen=True)
class RefinementStep:
    """One program entry: an elementary step plus its inertia bookkeeping."""

    step: ElementaryStep
    fractions: Optional[Tuple[float, ...]] = None  # SubdivideEdge only
    new_inertia: Optional[float] = None            # Add* steps only


@dataclass(frozen=True)
class TowerOptions:
    max_dim: int = 1 << 16
    dense_budget: int = 1 << 12
    operator_budget: int = 768      # dim cap for dense random-operator laws
    orbit_budget: int = 1 << 16
    tol_isometry: float = 1e-12
    tol_diagram: float = 1e-10
    tol_algebra: float = 1e-12
    degeneracy_tol: float = 1e-8
    seed: int = 0
    kernel_samples: int = 8


@dataclass(frozen=True, eq=False)
class TowerLevel:
    graph: OrientedGraph
    inertias: ham.InertiaAssignment
    space: HilbertSpace
    reduction: GaugeReduction
    hamiltonian: ham.HamiltonianOp
    reduced_hamiltonian: ham.HamiltonianOp
    laplacian_spec: Optional[LaplacianSpec] = None


@dataclass(frozen=True, eq=False)
class TowerLink:
    refinement: Refinement
    u: LinearMap
    u_red: LinearMap
    restriction_map: Optional[np.ndarray] = None  # finite backend: fine idx -> coarse idx


@dataclass(frozen=True, eq=False)
class Tower:
    group: StructureGroup
    levels: Tuple[TowerLevel, ...]
    links: Tuple[TowerLink, ...]
    options: TowerOptions

    @property
    def depth(self) -> int:
        return len(self.levels)


def make_level(graph: OrientedGraph, group: StructureGroup,
               inertias: ham.InertiaAssignment, options: TowerOptions,
               spec: Optional[LaplacianSpec] = None, *,
               enforce_spec: bool = True) -> TowerLevel:
    """Build all per-level objects.  The reduced Hamiltonian is always
    compressed, without insisting on equivariance; verify_tower reports the
    commutation law, so a faulty generating set shows up there instead of
    aborting the build."""
    space = configuration_space(graph, group)
    if space.dim > options.max_dim:
        raise BudgetExceeded("level dimension %d exceeds budget %d"
                             % (space.dim, options.max_dim))
    reduction = invariant_projector(space, budget=options.orbit_budget)
    h = ham.build_hamiltonian(space, inertias, spec, enforce=enforce_spec)
    h_red = ham.reduced_hamiltonian(h, reduction, check=False)
    return TowerLevel(graph, inertias, space, reduction, h, h_red, spec)


def make_link(coarse: TowerLevel, fine: TowerLevel, r: Refinement) -> TowerLink:
    u = pullback_isometry(r, coarse.space, fine.space)
    u_red = reduced_isometry(r, coarse.reduction, fine.reduction, u)
    rmap = None
    if coarse.space.backend == "finite":
        rmap = cs.restriction_index_map(coarse.space.group, r)
    return TowerLink(r, u, u_red, rmap)


def build_tower(base: OrientedGraph, group: StructureGroup,
                inertias: ham.InertiaAssignment,
                program: Sequence[RefinementStep],
                options: Optional[TowerOptions] = None,
                spec: Optional[LaplacianSpec] = None) -> Tower:
    """Apply a refinement program level by level, splitting inertias with
    exact path additivity at every link."""
    options = options or TowerOptions()
    levels = [make_level(base, group, inertias, options, spec)]
    links: List[TowerLink] = []
    for k, entry in enumerate(program):
        current = levels[-1]
        try:
            fine_graph, refinement = apply_elementary(current.graph, entry.step)
        except Exception as exc:
            raise StepInvalid("program step %d: %s" % (k, exc)) from exc
        fractions = None
        new_inertias = None
        if isinstance(entry.step, SubdivideEdge):
            if entry.fractions is not None:
                fractions = {entry.step.edge: entry.fractions}
        else:
            if entry.new_inertia is None:
                raise StepInvalid(
                    "program step %d adds edge %r and must carry its inertia"
                    % (k, entry.step.edge))
            new_inertias = {entry.step.edge: entry.new_inertia}
        fine_inertias = ham.split_inertias(refinement, current.inertias,
                                           fractions, new_inertias)
        fine_level = make_level(fine_graph, group, fine_inertias, options, spec)
        levels.append(fine_level)
        links.append(make_link(current, fine_level, refinement))
    return Tower(group, tuple(levels), tuple(links), options)


# ---------------------------------------------------------------------------
# Verification suite


def verify_tower(t: Tower) -> VerificationReport:
    """Evaluate every structural law at every level and link, plus the
    composed-link functor laws; residuals are max-abs matrix entries."""
    opts = t.options
    report = VerificationReport(title="tower verification")
    report.info["levels"] = t.depth
    report.info["seed"] = opts.seed
    rng = np.random.default_rng(opts.seed)

    for i, level in enumerate(t.levels):
        loc = "level %d" % i
        _verify_level(report, loc, level, opts, rng)

    for i, link in enumerate(t.links):
        loc = "link %d->%d" % (i, i + 1)
        _verify_link(report, loc, t.levels[i], t.levels[i + 1], link, opts, rng)

    if len(t.links) >= 2:
        _verify_composites(report, t, opts, rng)
    return report


def _verify_level(report: VerificationReport, loc: str, level: TowerLevel,
                  opts: TowerOptions, rng: np.random.Generator) -> None:
    space = level.space
    red = level.reduction

    # p is a quotient of the metric structure: p* is isometric and a section.
    report.add(loc, "projector.adjoint",
               residual(red.p.adjoint().matrix - red.embed.matrix),
               opts.tol_diagram)
    report.add(loc, "projector.section",
               residual((red.p.compose(red.embed)).matrix
                        - sp.identity(red.reduced_space.dim, format="csr")),
               opts.tol_diagram)
    report.add(loc, "projector.embed_isometry",
               isometry_defect(red.embed), opts.tol_isometry)

    # Hamiltonian structure.
    const = np.ones(space.dim) if space.backend == "finite" else _zero_mode_vector(space)
    report.add(loc, "hamiltonian.annihilates_constants",
               float(np.max(np.abs(level.hamiltonian.matrix @ const))),
               opts.tol_diagram)
    equiv = ham.check_equivariance(level.hamiltonian, tol=opts.tol_diagram,
                                   seed=opts.seed)
    report.add(loc, "hamiltonian.gauge_equivariant",
               float(equiv.info.get("max_commutator", 0.0)), opts.tol_diagram)
    report.add(loc, "hamiltonian.reduction_commutes",
               residual(red.p.matrix @ level.hamiltonian.matrix
                        - level.reduced_hamiltonian.matrix @ red.p.matrix),
               opts.tol_diagram)

    # Kernel algebra is represented multiplicatively and *-preservingly.
    if space.dim <= opts.operator_budget:
        worst_mul = 0.0
        worst_star = 0.0
        for _ in range(opts.kernel_samples):
            h1 = alg.random_kernel(space, rng)
            h2 = alg.random_kernel(space, rng)
            lhs = alg.to_operator(alg.convolve(h1, h2)).matrix
            rhs = alg.to_operator(h1).matrix @ alg.to_operator(h2).matrix
            worst_mul = max(worst_mul, residual(lhs - rhs))
            star = alg.to_operator(alg.involute(h1)).matrix \
                - alg.to_operator(h1).adjoint().matrix
            worst_star = max(worst_star, residual(star))
        scale = space.dim  # random kernels have entries O(1); products grow with dim
        report.add(loc, "algebra.representation_multiplicative",
                   worst_mul / scale, opts.tol_algebra)
        report.add(loc, "algebra.representation_star",
                   worst_star / scale, opts.tol_algebra)


def _verify_link(report: VerificationReport, loc: str, coarse: TowerLevel,
                 fine: TowerLevel, link: TowerLink, opts: TowerOptions,
                 rng: np.random.Generator) -> None:
    u, u_red = link.u, link.u_red
    pc, ec = coarse.reduction.p, coarse.reduction.embed
    pf, ef = fine.reduction.p, fine.reduction.embed

    report.add(loc, "isometry.full", isometry_defect(u), opts.tol_isometry)
    report.add(loc, "isometry.reduced", isometry_defect(u_red), opts.tol_isometry)

    # The two squares relating u, u_red with the sections and averages.
    report.add(loc, "square.hilbert.sections",
               residual(u.matrix @ ec.matrix - ef.matrix @ u_red.matrix),
               opts.tol_diagram)
    report.add(loc, "square.hilbert.averages",
               residual(pf.matrix @ u.matrix - u_red.matrix @ pc.matrix),
               opts.tol_diagram)
    # u maps invariant vectors to invariant vectors.
    inv_image = u.matrix @ ec.matrix
    report.add(loc, "invariance.preserved_by_u",
               residual(ef.matrix @ (pf.matrix @ inv_image) - inv_image),
               opts.tol_diagram)

    # Hamiltonian intertwining, full and reduced.
    report.add(loc, "hamiltonian.intertwine.full",
               residual(fine.hamiltonian.matrix @ u.matrix
                        - u.matrix @ coarse.hamiltonian.matrix),
               opts.tol_diagram)
    report.add(loc, "hamiltonian.intertwine.reduced",
               residual(fine.reduced_hamiltonian.matrix @ u_red.matrix
                        - u_red.matrix @ coarse.reduced_hamiltonian.matrix),
               opts.tol_diagram)

    if fine.space.dim <= opts.operator_budget:
        u_adj = u.adjoint()
        u_red_adj = u_red.adjoint()
        worst_inflate = 0.0
        worst_compress = 0.0
        worst_mult = 0.0
        for _ in range(opts.kernel_samples):
            b_red = alg.random_operator(coarse.reduction.reduced_space, rng)
            lhs = u.matrix @ (ec.matrix @ b_red.matrix @ pc.matrix) @ u_adj.matrix
            rhs = ef.matrix @ (u_red.matrix @ b_red.matrix @ u_red_adj.matrix) @ pf.matrix
            worst_inflate = max(worst_inflate, residual(lhs - rhs))

            b = alg.random_operator(coarse.space, rng)
            lhs = pf.matrix @ (u.matrix @ b.matrix @ u_adj.matrix) @ ef.matrix
            rhs = u_red.matrix @ (pc.matrix @ b.matrix @ ec.matrix) @ u_red_adj.matrix
            worst_compress = max(worst_compress, residual(lhs - rhs))

            b2 = alg.random_operator(coarse.space, rng)
            vb = u.matrix @ b.matrix @ u_adj.matrix
            vb2 = u.matrix @ b2.matrix @ u_adj.matrix
            vb12 = u.matrix @ (b.matrix @ b2.matrix) @ u_adj.matrix
            worst_mult = max(worst_mult, residual(vb @ vb2 - vb12))
        scale = max(coarse.space.dim, 1)
        report.add(loc, "square.observable.inflate", worst_inflate / scale,
                   opts.tol_diagram)
        report.add(loc, "square.observable.compress", worst_compress / scale,
                   opts.tol_diagram)
        report.add(loc, "embedding.multiplicative", worst_mult / scale,
                   opts.tol_algebra)

        if fine.space.backend == "finite":
            worst = 0.0
            for _ in range(opts.kernel_samples):
                h = alg.random_kernel(coarse.space, rng)
                pulled = alg.pullback_kernel(link.refinement, coarse.space,
                                             fine.space, h)
                lhs = u.matrix @ alg.to_operator(h).matrix @ u_adj.matrix
                worst = max(worst, residual(lhs - alg.to_operator(pulled).matrix))
            report.add(loc, "algebra.kernel_pullback", worst / scale,
                       opts.tol_algebra)


def _verify_composites(report: VerificationReport, t: Tower, opts: TowerOptions,
                       rng: np.random.Generator) -> None:
    loc = "link 0->%d" % (t.depth - 1)
    composed_r = t.links[0].refinement
    chained = t.links[0].u.matrix
    chained_red = t.links[0].u_red.matrix
    for link in t.links[1:]:
        composed_r = compose_refinements(composed_r, link.refinement)
        chained = link.u.matrix @ chained
        chained_red = link.u_red.matrix @ chained_red
    direct = pullback_isometry(composed_r, t.levels[0].space, t.levels[-1].space)
    report.add(loc, "functor.hilbert", residual(direct.matrix - chained),
               opts.tol_diagram)
    direct_red = reduced_isometry(composed_r, t.levels[0].reduction,
                                  t.levels[-1].reduction, direct)
    report.add(loc, "functor.hilbert.reduced",
               residual(direct_red.matrix - chained_red), opts.tol_diagram)

    u0k = LinearMap(t.levels[0].space, t.levels[-1].space, sp.csr_matrix(chained))
    res = roundtrip_compression_residual(t, u0k=u0k, rng=rng)
    report.add(loc, "roundtrip.compression", res, 0.0,
               detail="level-0 operator recovered from its level-%d image"
                      % (t.depth - 1))


def composed_isometry(t: Tower, upto: Optional[int] = None) -> LinearMap:
    """u_{0,k} as the chained product of link isometries."""
    upto = t.depth - 1 if upto is None else upto
    mat = sp.identity(t.levels[0].space.dim, format="csr")
    for link in t.links[:upto]:
        mat = link.u.matrix @ mat
    return LinearMap(t.levels[0].space, t.levels[upto].space, sp.csr_matrix(mat))


def roundtrip_compression_residual(t: Tower, *, u0k: Optional[LinearMap] = None,
                                   rng: Optional[np.random.Generator] = None) -> float:
    """Embed a random level-0 observable to the top level and compress it
    back; returns the max-abs recovery error, which is exactly zero.

    Finite backend: the embedded kernel is constant on restriction fibers,
    so evaluating it at one preimage per coarse point recovers the original
    bit for bit.  U(1) backend: the isometry is a basis injection, so the
    sparse triple product is an exact index selection.
    """
    rng = rng or np.random.default_rng(t.options.seed)
    space0 = t.levels[0].space

    if space0.backend == "finite":
        composed_r = t.links[0].refinement
        for link in t.links[1:]:
            composed_r = compose_refinements(composed_r, link.refinement)
        h = alg.random_kernel(space0, rng)
        pulled = alg.pullback_kernel(composed_r, space0, t.levels[-1].space, h)
        rmap = cs.restriction_index_map(space0.group, composed_r)
        section = np.full(space0.dim, -1, dtype=np.int64)
        for fidx in range(rmap.shape[0] - 1, -1, -1):
            section[rmap[fidx]] = fidx
        recovered = pulled.values[np.ix_(section, section)]
        return residual(recovered - h.values)

    if u0k is None:
        u0k = composed_isometry(t)
    dim0 = space0.dim
    b0 = sp.csr_matrix(rng.standard_normal((dim0, dim0))
                       + 1j * rng.standard_normal((dim0, dim0)))
    u_mat = sp.csr_matrix(u0k.matrix)
    u_adj = sp.csr_matrix(u0k.adjoint().matrix)
    image = u_mat @ b0 @ u_adj          # stays sparse: column/row structure
    back = u_adj @ image @ u_mat
    return residual(back - b0)


# ---------------------------------------------------------------------------
# Exact measure pushforward


def pushforward_check(t: Tower) -> VerificationReport:
    """Rational-arithmetic check that restriction pushes the fine Haar
    weights onto the coarse ones, and likewise for orbit masses.  Residuals
    are 0.0 (exact) or 1.0 (mismatch); the tolerance is zero."""
    report = VerificationReport(title="measure pushforward")
    if isinstance(t.group, U1Truncated):
        for i, link in enumerate(t.links):
            loc = "link %d->%d" % (i, i + 1)
            defect = isometry_defect(link.u)
            report.add(loc, "measure.mode_overlaps",
                       0.0 if defect == 0.0 else 1.0, 0.0,
                       detail="orthonormal modes map to orthonormal modes")
        return report

    order = t.group.order
    for i, link in enumerate(t.links):
        loc = "link %d->%d" % (i, i + 1)
        coarse, fine = t.levels[i], t.levels[i + 1]
        w_fine = Fraction(1, order ** fine.graph.num_edges)
        w_coarse = Fraction(1, order ** coarse.graph.num_edges)
        masses: Dict[int, Fraction] = {}
        for fidx, cidx in enumerate(link.restriction_map):
            masses[int(cidx)] = masses.get(int(cidx), Fraction(0)) + w_fine
        exact = (set(masses) == set(range(coarse.space.dim))
                 and all(m == w_coarse for m in masses.values()))
        report.add(loc, "measure.pushforward", 0.0 if exact else 1.0, 0.0,
                   detail="each coarse point receives mass %s" % w_coarse)

        table_c = coarse.reduction.orbit_table
        table_f = fine.reduction.orbit_table
        orbit_of_c = table_c.orbit_of
        red_masses: Dict[int, Fraction] = {}
        for orb in table_f.orbits:
            cidx = int(link.restriction_map[orb.indices[0]])
            k = orbit_of_c[cidx]
            red_masses[k] = red_masses.get(k, Fraction(0)) \
                + Fraction(orb.size, table_f.total)
        coarse_masses = table_c.masses()
        exact_red = (set(red_masses) == set(range(len(table_c.orbits)))
                     and all(red_masses[k] == coarse_masses[k] for k in red_masses))
        report.add(loc, "measure.pushforward.reduced",
                   0.0 if exact_red else 1.0, 0.0,
                   detail="orbit masses %s" % (tuple(str(m) for m in coarse_masses),))
    return report


# ---------------------------------------------------------------------------
# Projective sampling


def sample_projective(t: Tower, seed: int, count: int = 1) -> List[List[cs.Configuration]]:
    """Draw finest-level configurations uniformly and return their full
    restriction chains (coarsest first)."""
    if isinstance(t.group, U1Truncated):
        raise BackendUnsupported("projective sampling uses configuration points")
    rng = np.random.default_rng(seed)
    chains = []
    top = t.levels[-1]
    for _ in range(count):
        idx = int(rng.integers(0, top.space.dim))
        chain_idx = [idx]
        for link in reversed(t.links):
            idx = int(link.restriction_map[idx])
            chain_idx.append(idx)
        chain_idx.reverse()
        chains.append([
            cs.index_to_config(level.graph, t.group, j)
            for level, j in zip(t.levels, chain_idx)
        ])
    return chains


def verify_chain(t: Tower, chain: Sequence[cs.Configuration]) -> bool:
    """Independent re-check that a sampled family is projectively consistent."""
    for i, link in enumerate(t.links):
        expected = cs.restrict(t.group, link.refinement, chain[i + 1])
        if expected != chain[i]:
            return False
    return True


# ---------------------------------------------------------------------------
# Spectral flow


@dataclass(frozen=True)
class EigenpairCertificate:
    link: int
    eigenvalue: float
    residual: float
    ok: bool


@dataclass(frozen=True, eq=False)
class SpectralFlow:
    full: Tuple[Optional[ham.Spectrum], ...]
    reduced: Tuple[ham.Spectrum, ...]
    certificates: Tuple[EigenpairCertificate, ...]
    stabilization: Tuple[bool, ...]  # per link: reduced spectra agree

    def rows(self) -> List[Tuple[int, str, float, int]]:
        out: List[Tuple[int, str, float, int]] = []
        for level, spec in enumerate(self.full):
            if spec is None:
                continue
            for value, mult in spec.eigenvalues:
                out.append((level, "full", value, mult))
        for level, spec in enumerate(self.reduced):
            for value, mult in spec.eigenvalues:
                out.append((level, "reduced", value, mult))
        return out


def spectral_flow(t: Tower, *, tol: float = 1e-10) -> SpectralFlow:
    """Per-level spectra plus intertwining certificates per link: every
    coarse eigenpair maps under u to a fine eigenpair with the same
    eigenvalue."""
    opts = t.options
    full = []
    reduced = []
    for level in t.levels:
        full.append(ham.spectrum(level.hamiltonian,
                                 degeneracy_tol=opts.degeneracy_tol,
                                 dense_budget=opts.dense_budget))
        reduced.append(ham.spectrum(level.reduced_hamiltonian,
                                    degeneracy_tol=opts.degeneracy_tol,
                                    dense_budget=opts.dense_budget))

    certificates: List[EigenpairCertificate] = []
    for i, link in enumerate(t.links):
        coarse = t.levels[i]
        fine = t.levels[i + 1]
        if coarse.hamiltonian.is_diagonal:
            # eigenvectors are the basis itself; keep everything sparse
            values = np.real(coarse.hamiltonian.matrix.diagonal()).astype(float)
            u_mat = sp.csr_matrix(link.u.matrix)
            defect = abs(fine.hamiltonian.matrix @ u_mat - u_mat @ sp.diags(values))
            col_res = np.asarray(defect.max(axis=0).todense()).ravel()
        else:
            values, vectors = _eigenpairs(coarse.hamiltonian, opts)
            mapped = link.u.matrix @ vectors
            defect = fine.hamiltonian.matrix @ mapped - mapped * values[None, :]
            col_res = np.max(np.abs(defect), axis=0) if defect.size else np.array([])
        for val, res in zip(values, col_res):
            certificates.append(EigenpairCertificate(i, float(val), float(res),
                                                     bool(res <= tol)))

    stabilization = tuple(
        _spectra_agree(reduced[i], reduced[i + 1], tol)
        for i in range(len(t.links)))
    return SpectralFlow(tuple(full), tuple(reduced), tuple(certificates),
                        stabilization)


def _eigenpairs(h: ham.HamiltonianOp, opts: TowerOptions) -> Tuple[np.ndarray, np.ndarray]:
    if h.is_diagonal:
        values = np.real(h.matrix.diagonal()).astype(float)
        vectors = np.eye(h.dim)
        return values, vectors
    if h.dim > opts.dense_budget:
        raise BudgetExceeded("eigenvector extraction needs dim <= %d, got %d"
                             % (opts.dense_budget, h.dim))
    values, vectors = np.linalg.eigh(h.matrix.toarray())
    return values, vectors


def _spectra_agree(a: ham.Spectrum, b: ham.Spectrum, tol: float) -> bool:
    if a.dim != b.dim and len(a.eigenvalues) != len(b.eigenvalues):
        pass  # dims may differ; only the clustered values must match
    if len(a.eigenvalues) != len(b.eigenvalues):
        return False
    return all(abs(va - vb) <= tol and ma == mb
               for (va, ma), (vb, mb) in zip(a.eigenvalues, b.eigenvalues))


def _zero_mode_vector(space: HilbertSpace) -> np.ndarray:
    from .hilbert import mode_index
    vec = np.zeros(space.dim)
    vec[mode_index(space, (0,) * space.graph.num_edges)] = 1.0
    return vec
