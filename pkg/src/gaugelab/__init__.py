"""Numerical laboratory for gauge fields on finite oriented graphs.

The package builds configuration spaces over a structure group (finite or
truncated U(1)), the weighted function spaces on them, gauge averaging,
pullback isometries along graph refinements, kernel algebras, electric
Hamiltonians, and whole refinement towers with a verification suite for
every structural law.
"""

from .errors import (
    BackendUnsupported,
    BudgetExceeded,
    GaugeLabError,
    ParseError,
)
from .graph import (
    AddEdge,
    AddVertexEdge,
    Edge,
    GraphPath,
    OrientedGraph,
    Refinement,
    SubdivideEdge,
    apply_elementary,
    compose_refinements,
    decompose_elementary,
    identity_refinement,
    make_graph,
    make_path,
    make_refinement,
    replay,
    validate_graph,
)
from .group import (
    FiniteGroup,
    LaplacianSpec,
    U1Truncated,
    default_laplacian_spec,
    make_cyclic,
    make_dihedral,
    make_quaternion,
    one_site_laplacian,
    verify_group_axioms,
    verify_laplacian_spec,
)
from .configspace import (
    Configuration,
    GaugeElement,
    OrbitTable,
    burnside_orbit_count,
    gauge_act,
    orbits,
    restrict,
    restrict_gauge,
)
from .hilbert import (
    GaugeReduction,
    HilbertSpace,
    LinearMap,
    configuration_space,
    gauge_unitary,
    invariant_projector,
    isometry_defect,
    pullback_isometry,
    reduced_isometry,
)
from .algebra import (
    Kernel,
    conjugate_embed,
    convolve,
    from_operator,
    identity_kernel,
    involute,
    pullback_kernel,
    to_operator,
)
from .hamiltonian import (
    HamiltonianOp,
    InertiaAssignment,
    Spectrum,
    build_hamiltonian,
    reduced_hamiltonian,
    spectrum,
    split_inertias,
    uniform_inertias,
)
from .tower import (
    RefinementStep,
    Tower,
    TowerOptions,
    build_tower,
    pushforward_check,
    sample_projective,
    spectral_flow,
    verify_tower,
)

__version__ = "0.1.0"
