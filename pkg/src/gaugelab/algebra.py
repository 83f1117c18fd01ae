"""The pair-groupoid kernel algebra: convolution, involution, integral
operators, the embeddings b -> u b u*, and the reduction/inflation maps.

Kernels store the raw two-point function h(y, x); the basis weights enter
only when convolving or when turning a kernel into an operator, so the
finite and U(1) backends share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import configspace as cs
from .errors import BackendUnsupported, GraphMismatch, SpaceMismatch
from .graph import Refinement
from .hilbert import GaugeReduction, HilbertSpace, LinearMap


@dataclass(frozen=True, eq=False)
class Kernel:
    """A function on pairs of basis configurations; entry [y, x] = h(y, x)."""

    space: HilbertSpace
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.space.dim, self.space.dim):
            raise SpaceMismatch("kernel must be dim x dim over its space")


def _same_space(k1: Kernel, k2: Kernel) -> None:
    if k1.space is not k2.space and not k1.space.compatible(k2.space):
        raise SpaceMismatch("kernels live on different spaces")


def convolve(h1: Kernel, h2: Kernel) -> Kernel:
    """(h1 * h2)(y, x) = sum_z w_z h1(z, x) h2(y, z)."""
    _same_space(h1, h2)
    w = h1.space.weights
    return Kernel(h1.space, h2.values @ (w[:, None] * h1.values))

def involute(h: Kernel) -> Kernel:
    """h*(y, x) = conj(h(x, y)); satisfies T_{h*} = (T_h)^dagger."""
    return Kernel(h.space, np.conj(h.values.T))


def identity_kernel(space: HilbertSpace) -> Kernel:
    """The convolution unit: the delta kernel scaled against the weights."""
    return Kernel(space, np.diag(1.0 / space.weights))


def to_operator(h: Kernel) -> LinearMap:
    """The integral operator (T_h psi)(x) = sum_y w_y h(y, x) psi(y)."""
    w = h.space.weights
    return LinearMap(h.space, h.space, (w[:, None] * h.values).T.copy())


def from_operator(op: LinearMap) -> Kernel:
    """Invert the weighting: every operator is an integral operator here."""
    if op.domain is not op.codomain and not op.domain.compatible(op.codomain):
        raise SpaceMismatch("only endomorphisms come from kernels")
    w = op.domain.weights
    return Kernel(op.domain, op.dense().T / w[:, None])


def conjugate_embed(u: LinearMap, b: LinearMap) -> LinearMap:
    """v(b) = u b u*, the isometric *-embedding along a pullback isometry."""
    if b.domain.dim != u.domain.dim:
        raise GraphMismatch("operator does not live on the isometry's domain")
    return u.compose(b).compose(u.adjoint())


def pullback_kernel(r: Refinement, coarse: HilbertSpace, fine: HilbertSpace,
                    h: Kernel) -> Kernel:
    """(R*h)(y, x) = h(restrict(y), restrict(x)); satisfies v(T_h) = T_{R*h}."""
    if fine.backend != "finite":
        raise BackendUnsupported("kernel pullback uses point restriction; "
                                 "U(1) embeds operators directly")
    if not h.space.graph.same_structure(r.coarse):
        raise GraphMismatch("kernel does not live on the coarse space")
    rmap = cs.restriction_index_map(coarse.group, r)
    return Kernel(fine, h.values[np.ix_(rmap, rmap)])


def reduce_observable(red: GaugeReduction, b: LinearMap) -> LinearMap:
    """P(b) = p b p*, the compression onto the reduced space."""
    return red.p.compose(b).compose(red.embed)


def inflate_observable(red: GaugeReduction, b_red: LinearMap) -> LinearMap:
    """Pi(b) = p* b p, the inflation of a reduced observable."""
    return red.embed.compose(b_red).compose(red.p)


def random_kernel(space: HilbertSpace, rng: np.random.Generator) -> Kernel:
    re = rng.standard_normal((space.dim, space.dim))
    im = rng.standard_normal((space.dim, space.dim))
    return Kernel(space, re + 1j * im)


def random_operator(space: HilbertSpace, rng: np.random.Generator) -> LinearMap:
    re = rng.standard_normal((space.dim, space.dim))
    im = rng.standard_normal((space.dim, space.dim))
    return LinearMap(space, space, re + 1j * im)
