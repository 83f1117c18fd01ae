"""End-to-end acceptance gate.

Eight numbered criteria, one printed pass/fail line each.  Tolerances are
pinned here and never loosened: isometry and algebra laws at 1e-12, diagram
and spectral laws at 1e-10, measure pushforward exact in rational
arithmetic, operator recovery exact.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

import numpy as np
import pytest

from gaugelab import algebra as alg
from gaugelab import configspace as cs
from gaugelab.graph import (
    AddEdge,
    AddVertexEdge,
    OrientedGraph,
    Refinement,
    SubdivideEdge,
    make_graph,
    replay,
)
from gaugelab.group import (
    FiniteGroup,
    LaplacianSpec,
    U1Truncated,
    make_cyclic,
    make_dihedral,
    make_quaternion,
)
from gaugelab.hamiltonian import (
    HamiltonianOp,
    InertiaAssignment,
    build_hamiltonian,
    reduced_hamiltonian,
    spectrum,
    split_inertias,
    uniform_inertias,
)
from gaugelab.hilbert import (
    configuration_space,
    invariant_projector,
    isometry_defect,
    pullback_isometry,
    reduced_isometry,
    residual,
)
from gaugelab.tower import (
    RefinementStep,
    TowerOptions,
    build_tower,
    roundtrip_compression_residual,
    spectral_flow,
)

TOL_ISOMETRY = 1e-12
TOL_DIAGRAM = 1e-10
TOL_ALGEBRA = 1e-12
TOL_SPECTRUM = 1e-10
KERNELS_PER_INSTANCE = 100


def announce(capsys, number: int, name: str, passed: bool, detail: str) -> None:
    with capsys.disabled():
        print("ACCEPTANCE %d %-18s %s  (%s)"
              % (number, name, "PASS" if passed else "FAIL", detail))


# ---------------------------------------------------------------------------
# Corpus


@dataclass
class Instance:
    name: str
    group: object
    refinement: Refinement
    coarse_space: object
    fine_space: object
    u: object
    red_c: object
    red_f: object
    u_red: object
    inertias_c: InertiaAssignment
    inertias_f: InertiaAssignment
    h_c: HamiltonianOp
    h_f: HamiltonianOp
    h_red_c: HamiltonianOp
    h_red_f: HamiltonianOp

    @property
    def finite(self) -> bool:
        return isinstance(self.group, FiniteGroup)


def _single_edge():
    return make_graph([0, 1], [(0, 0, 1)])


def _chain2():
    return make_graph([0, 1, 2], [(0, 0, 1), (1, 1, 2)])


def _triangle():
    return make_graph([0, 1, 2], [(0, 0, 1), (1, 1, 2), (2, 2, 0)])


SHAPES = {
    "subdiv": (_single_edge, [SubdivideEdge(edge=0, vertex=2, first=1, second=2)]),
    "pendant": (_single_edge,
                [AddVertexEdge(vertex=2, edge=1, source=1, target=2)]),
    "chord": (_chain2, [AddEdge(edge=2, source=2, target=0)]),
    "tri-subdiv": (_triangle, [SubdivideEdge(edge=0, vertex=3, first=10, second=11)]),
}

GROUPS = {
    "Z2": make_cyclic(2),
    "Z3": make_cyclic(3),
    "Z4": make_cyclic(4),
    "D3": make_dihedral(3),
    "Q8": make_quaternion(),
    "U1N1": U1Truncated(1),
    "U1N2": U1Truncated(2),
    "U1N3": U1Truncated(3),
}

CORPUS_PLAN = [
    (gname, shape)
    for gname in GROUPS
    for shape in ("subdiv", "pendant")
] + [
    (gname, "chord") for gname in ("Z2", "Z3", "Z4", "U1N1", "U1N2")
] + [
    (gname, "tri-subdiv") for gname in ("Z2", "Z3", "U1N1")
]


def build_instance(name: str, group, coarse: OrientedGraph, steps) -> Instance:
    _, r = replay(coarse, steps)
    coarse_space = configuration_space(coarse, group)
    fine_space = configuration_space(r.fine, group)
    u = pullback_isometry(r, coarse_space, fine_space)
    red_c = invariant_projector(coarse_space)
    red_f = invariant_projector(fine_space)
    u_red = reduced_isometry(r, red_c, red_f, u)
    inertias_c = uniform_inertias(coarse)
    added = {e.id: 0.5 for e in r.fine.edges
             if e.id not in {s for p in r.edge_map.values() for s in p.steps}}
    inertias_f = split_inertias(r, inertias_c, new_inertias=added)
    h_c = build_hamiltonian(coarse_space, inertias_c)
    h_f = build_hamiltonian(fine_space, inertias_f)
    return Instance(name, group, r, coarse_space, fine_space, u, red_c, red_f,
                    u_red, inertias_c, inertias_f, h_c, h_f,
                    reduced_hamiltonian(h_c, red_c),
                    reduced_hamiltonian(h_f, red_f))


@pytest.fixture(scope="module")
def corpus() -> List[Instance]:
    instances = []
    for gname, shape in CORPUS_PLAN:
        factory, steps = SHAPES[shape]
        instances.append(build_instance("%s/%s" % (gname, shape),
                                        GROUPS[gname], factory(), steps))
    return instances


def diagram_residuals(inst: Instance, rng: np.random.Generator) -> dict:
    """The four structural squares plus the two Hamiltonian diagrams."""
    u, u_red = inst.u, inst.u_red
    pc, ec = inst.red_c.p, inst.red_c.embed
    pf, ef = inst.red_f.p, inst.red_f.embed
    scale = max(inst.coarse_space.dim, 1)

    out = {
        "hilbert.sections": residual(u.matrix @ ec.matrix
                                     - ef.matrix @ u_red.matrix),
        "hilbert.averages": residual(pf.matrix @ u.matrix
                                     - u_red.matrix @ pc.matrix),
        "hamiltonian.full": residual(inst.h_f.matrix @ u.matrix
                                     - u.matrix @ inst.h_c.matrix),
        "hamiltonian.reduced": residual(inst.h_red_f.matrix @ u_red.matrix
                                        - u_red.matrix @ inst.h_red_c.matrix),
    }
    u_adj = u.adjoint()
    u_red_adj = u_red.adjoint()
    worst_inflate = 0.0
    worst_compress = 0.0
    for _ in range(4):
        b_red = alg.random_operator(inst.red_c.reduced_space, rng)
        lhs = u.matrix @ (ec.matrix @ b_red.matrix @ pc.matrix) @ u_adj.matrix
        rhs = ef.matrix @ (u_red.matrix @ b_red.matrix @ u_red_adj.matrix) @ pf.matrix
        worst_inflate = max(worst_inflate, residual(lhs - rhs) / scale)
        b = alg.random_operator(inst.coarse_space, rng)
        lhs = pf.matrix @ (u.matrix @ b.matrix @ u_adj.matrix) @ ef.matrix
        rhs = u_red.matrix @ (pc.matrix @ b.matrix @ ec.matrix) @ u_red_adj.matrix
        worst_compress = max(worst_compress, residual(lhs - rhs) / scale)
    out["observable.inflate"] = worst_inflate
    out["observable.compress"] = worst_compress
    return out


# ---------------------------------------------------------------------------
# Criteria


def test_criterion_1_isometries(corpus, capsys):
    worst = 0.0
    for inst in corpus:
        worst = max(worst, isometry_defect(inst.u), isometry_defect(inst.u_red))
    passed = worst <= TOL_ISOMETRY
    announce(capsys, 1, "isometry suite", passed,
             "%d refinements, max defect %.2e" % (len(corpus), worst))
    assert passed


def test_criterion_2_diagrams(corpus, capsys):
    rng = np.random.default_rng(0)
    worst = 0.0
    for inst in corpus:
        for law, res in diagram_residuals(inst, rng).items():
            worst = max(worst, res)
    clean = worst <= TOL_DIAGRAM

    # Fault A: break inertia additivity on the Z2 triangle subdivision;
    # exactly the Hamiltonian intertwinings must flip.
    base = next(i for i in corpus if i.name == "Z2/tri-subdiv")
    broken_inertias = InertiaAssignment(
        {**base.inertias_f.values, 10: 0.9, 11: 0.9})
    h_f_bad = build_hamiltonian(base.fine_space, broken_inertias)
    bad = Instance(base.name, base.group, base.refinement, base.coarse_space,
                   base.fine_space, base.u, base.red_c, base.red_f, base.u_red,
                   base.inertias_c, broken_inertias, base.h_c, h_f_bad,
                   base.h_red_c, reduced_hamiltonian(h_f_bad, base.red_f))
    res_a = diagram_residuals(bad, rng)
    fault_a_ok = (res_a["hamiltonian.full"] > TOL_DIAGRAM
                  and res_a["hamiltonian.reduced"] > TOL_DIAGRAM
                  and all(res_a[k] <= TOL_DIAGRAM for k in
                          ("hilbert.sections", "hilbert.averages",
                           "observable.inflate", "observable.compress")))

    # Fault B: a symmetric but non-conjugation-closed generating set; the
    # reduction stops commuting while the Hilbert-space squares survive.
    tri = _triangle()
    d3 = make_dihedral(3)
    space = configuration_space(tri, d3)
    h_bad = build_hamiltonian(space, uniform_inertias(tri), LaplacianSpec((3,)),
                              enforce=False)
    red = invariant_projector(space)
    h_bad_red = reduced_hamiltonian(h_bad, red, check=False)
    commute = residual(red.p.matrix @ h_bad.matrix
                       - h_bad_red.matrix @ red.p.matrix)
    fault_b_ok = (commute > TOL_DIAGRAM
                  and isometry_defect(red.embed) <= TOL_ISOMETRY)

    passed = clean and fault_a_ok and fault_b_ok
    announce(capsys, 2, "diagram suite", passed,
             "max residual %.2e, fault injection %s"
             % (worst, "targeted" if (fault_a_ok and fault_b_ok) else "leaked"))
    assert clean
    assert fault_a_ok
    assert fault_b_ok


def test_criterion_3_kernel_algebra(corpus, capsys):
    rng = np.random.default_rng(1)
    worst = 0.0
    for inst in corpus:
        space = inst.coarse_space
        scale = space.dim
        u_adj = inst.u.adjoint()
        for _ in range(KERNELS_PER_INSTANCE):
            h1 = alg.random_kernel(space, rng)
            h2 = alg.random_kernel(space, rng)
            mul = alg.to_operator(alg.convolve(h1, h2)).matrix \
                - alg.to_operator(h1).matrix @ alg.to_operator(h2).matrix
            star = alg.to_operator(alg.involute(h1)).matrix \
                - alg.to_operator(h1).adjoint().matrix
            worst = max(worst, residual(mul) / scale, residual(star) / scale)
            if inst.finite:
                pulled = alg.pullback_kernel(inst.refinement, space,
                                             inst.fine_space, h1)
                emb = inst.u.matrix @ alg.to_operator(h1).matrix @ u_adj.matrix
                worst = max(worst, residual(
                    emb - alg.to_operator(pulled).matrix) / scale)
    passed = worst <= TOL_ALGEBRA
    announce(capsys, 3, "kernel algebra", passed,
             "%d kernels/instance, max residual %.2e"
             % (KERNELS_PER_INSTANCE, worst))
    assert passed


def test_criterion_4_measure_exactness(corpus, capsys):
    links = 0
    for inst in corpus:
        if not inst.finite:
            continue
        links += 1
        group = inst.group
        rmap = cs.restriction_index_map(group, inst.refinement)
        w_fine = Fraction(1, group.order ** inst.refinement.fine.num_edges)
        w_coarse = Fraction(1, group.order ** inst.refinement.coarse.num_edges)
        masses = {}
        for cidx in rmap:
            masses[int(cidx)] = masses.get(int(cidx), Fraction(0)) + w_fine
        assert set(masses) == set(range(inst.coarse_space.dim))
        assert all(m == w_coarse for m in masses.values())

        table_c = inst.red_c.orbit_table
        table_f = inst.red_f.orbit_table
        orbit_of_c = table_c.orbit_of
        red_masses = {}
        for orb in table_f.orbits:
            k = orbit_of_c[int(rmap[orb.indices[0]])]
            red_masses[k] = red_masses.get(k, Fraction(0)) \
                + Fraction(orb.size, table_f.total)
        assert red_masses == dict(enumerate(table_c.masses()))
    announce(capsys, 4, "measure exactness", True,
             "%d finite links, rational residual 0" % links)


def test_criterion_5_orbit_counts(corpus, capsys):
    checked = 0
    for inst in corpus:
        if not inst.finite:
            continue
        for graph, table in ((inst.refinement.coarse, inst.red_c.orbit_table),
                             (inst.refinement.fine, inst.red_f.orbit_table)):
            expected = cs.burnside_orbit_count(graph, inst.group)
            assert len(table.orbits) == expected, inst.name
            checked += 1
    # the two named cross-checks
    z2 = make_cyclic(2)
    assert len(cs.orbits(_triangle(), z2).orbits) == 2
    assert cs.burnside_orbit_count(_triangle(), z2) == 2
    for g in (z2, make_cyclic(3), make_dihedral(3), make_quaternion()):
        assert len(cs.orbits(_single_edge(), g).orbits) == 1
        assert cs.burnside_orbit_count(_single_edge(), g) == 1
    announce(capsys, 5, "orbit counts", True,
             "%d tables match the averaging oracle" % checked)


def test_criterion_6_spectral_certificates(capsys):
    worst = 0.0

    edge = _single_edge()
    z2 = make_cyclic(2)
    space = configuration_space(edge, z2)
    inertia = 1.7
    h = build_hamiltonian(space, InertiaAssignment({0: inertia}))
    got = np.sort(spectrum(h).flat())
    worst = max(worst, float(np.max(np.abs(got - np.array([0.0, inertia])))))

    tri = _triangle()
    inertias = InertiaAssignment({0: 0.4, 1: 1.1, 2: 2.5})
    space = configuration_space(tri, z2)
    h_red = reduced_hamiltonian(build_hamiltonian(space, inertias),
                                invariant_projector(space))
    got = np.sort(spectrum(h_red).flat())
    worst = max(worst, float(np.max(np.abs(got - np.array([0.0, 4.0])))))

    for cutoff in (1, 2, 3):
        space = configuration_space(tri, U1Truncated(cutoff))
        h_red = reduced_hamiltonian(build_hamiltonian(space, inertias),
                                    invariant_projector(space))
        got = np.sort(spectrum(h_red).flat())
        expected = np.sort([0.5 * 4.0 * n * n
                            for n in range(-cutoff, cutoff + 1)])
        worst = max(worst, float(np.max(np.abs(got - expected))))

    passed = worst <= TOL_SPECTRUM
    announce(capsys, 6, "spectral certs", passed, "max deviation %.2e" % worst)
    assert passed


def test_criterion_7_limit_consistency(capsys):
    tri = _triangle()
    program = [
        RefinementStep(SubdivideEdge(edge=0, vertex=3, first=10, second=11)),
        RefinementStep(SubdivideEdge(edge=1, vertex=4, first=12, second=13)),
        RefinementStep(SubdivideEdge(edge=2, vertex=5, first=14, second=15)),
    ]
    details = []
    passed = True
    for label, group in (("Z2", make_cyclic(2)), ("U1N2", U1Truncated(2))):
        tower = build_tower(tri, group, uniform_inertias(tri), program,
                            TowerOptions(max_dim=1 << 15, seed=0))
        assert tower.depth == 4
        flow = spectral_flow(tower, tol=TOL_SPECTRUM)
        stable = all(flow.stabilization)
        certs_ok = all(c.ok for c in flow.certificates)
        cert_worst = max(c.residual for c in flow.certificates)
        recovery = roundtrip_compression_residual(tower)
        passed = passed and stable and certs_ok and recovery == 0.0
        details.append("%s certs %.1e recovery %.1e" % (label, cert_worst, recovery))
    announce(capsys, 7, "limit consistency", passed, "; ".join(details))
    assert passed


def test_criterion_8_determinism(tmp_path, capsys):
    from gaugelab.cli import main

    text = """
[group]
kind = cyclic
n = 2

[graph]
vertex a
vertex b
vertex c
edge e1 a b
edge e2 b c
edge e3 c a

[refine]
subdivide e1
subdivide e2
"""
    path = tmp_path / "triangle.exp"
    path.write_text(text)
    runs = {}
    for command in ("spectrum", "verify"):
        outputs = []
        for _ in range(2):
            assert main([command, str(path), "--seed", "9"]) == 0
            outputs.append(capsys.readouterr().out.encode())
        runs[command] = outputs[0] == outputs[1]
    passed = all(runs.values())
    announce(capsys, 8, "determinism", passed,
             "spectrum and verify byte-identical with fixed seed")
    assert passed
