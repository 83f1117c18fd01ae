"""Structure groups: exact finite groups given by multiplication tables, and
a truncated-U(1) backend living entirely in the momentum basis.

The one-site Laplacian for a finite group is the Cayley Laplacian over a
symmetric, conjugation-closed generating set, which makes it bi-invariant;
for truncated U(1) it is diagonal with entry -n^2 at mode n.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidOrder, SpecInvalid
from .reporting import ValidationReport


class FiniteGroup:
    """A finite group presented by its multiplication table.

    ``table[a, b]`` is the product a*b; the identity has index 0.
    """

    def __init__(self, name: str, table: np.ndarray):
        table = np.asarray(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise InvalidOrder("multiplication table must be square")
        self.name = name
        self.table = table
        self.order = table.shape[0]
        self.identity = 0
        self.inverse = self._compute_inverses()
        self.conjugacy_classes = self._compute_classes()

    def _compute_inverses(self) -> np.ndarray:
        inv = np.full(self.order, -1, dtype=np.int64)
        for a in range(self.order):
            hits = np.nonzero(self.table[a] == self.identity)[0]
            if len(hits) != 1:
                raise InvalidOrder("element %d has no unique inverse" % a)
            inv[a] = hits[0]
        return inv

    def _compute_classes(self) -> Tuple[frozenset, ...]:
        classes: List[frozenset] = []
        assigned = set()
        for a in range(self.order):
            if a in assigned:
                continue
            cls = frozenset(self.mul(self.mul(g, a), self.inv(g)) for g in range(self.order))
            classes.append(cls)
            assigned.update(cls)
        return tuple(sorted(classes, key=min))

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def class_of(self, a: int) -> frozenset:
        for cls in self.conjugacy_classes:
            if a in cls:
                return cls
        raise InvalidOrder("element %d out of range" % a)

    def __repr__(self) -> str:
        return "FiniteGroup(%s, order=%d)" % (self.name, self.order)


@dataclass(frozen=True)
class U1Truncated:
    """Momentum modes -cutoff..cutoff of the circle group; never evaluated
    pointwise."""

    cutoff: int

    def __post_init__(self) -> None:
        if self.cutoff < 0:
            raise InvalidOrder("cutoff must be nonnegative")

    @property
    def modes(self) -> Tuple[int, ...]:
        return tuple(range(-self.cutoff, self.cutoff + 1))

    @property
    def dim(self) -> int:
        return 2 * self.cutoff + 1

    def mode_index(self, n: int) -> int:
        if abs(n) > self.cutoff:
            raise InvalidOrder("mode %d exceeds cutoff %d" % (n, self.cutoff))
        return n + self.cutoff


StructureGroup = Union[FiniteGroup, U1Truncated]


def make_cyclic(n: int) -> FiniteGroup:
    if n < 2:
        raise InvalidOrder("cyclic group needs order >= 2")
    idx = np.arange(n)
    return FiniteGroup("Z%d" % n, (idx[:, None] + idx[None, :]) % n)


def make_dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order 2n; index i + n*j encodes r^i s^j."""
    if n < 2:
        raise InvalidOrder("dihedral group needs n >= 2")
    order = 2 * n
    table = np.zeros((order, order), dtype=np.int64)
    for a in range(order):
        i1, j1 = a % n, a // n
        for b in range(order):
            i2, j2 = b % n, b // n
            # (r^i1 s^j1)(r^i2 s^j2) = r^(i1 + (-1)^j1 i2) s^(j1+j2)
            i = (i1 + (i2 if j1 == 0 else -i2)) % n
            j = (j1 + j2) % 2
            table[a, b] = i + n * j
    return FiniteGroup("D%d" % n, table)


def make_quaternion() -> FiniteGroup:
    """Quaternion group of order 8: indices 0..7 = 1,-1,i,-i,j,-j,k,-k."""
    units = ["1", "i", "j", "k"]
    # unit multiplication: (sign, unit)
    unit_mul = {
        ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
        ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
        ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
        ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
    }

    def decode(x: int) -> Tuple[int, str]:
        return (1 if x % 2 == 0 else -1), units[x // 2]

    def encode(sign: int, unit: str) -> int:
        return units.index(unit) * 2 + (0 if sign == 1 else 1)

    table = np.zeros((8, 8), dtype=np.int64)
    for a in range(8):
        sa, ua = decode(a)
        for b in range(8):
            sb, ub = decode(b)
            sc, uc = unit_mul[(ua, ub)]
            table[a, b] = encode(sa * sb * sc, uc)
    return FiniteGroup("Q8", table)


def verify_group_axioms(g: FiniteGroup) -> ValidationReport:
    """Check associativity over all triples, identity, inverses, and that the
    conjugacy classes partition the element set and are closed."""
    report = ValidationReport(subject="group %s" % g.name)
    n = g.order
    t = g.table
    left = t[t, :]            # left[a,b,c]  = (a*b)*c
    right = t[:, t]           # right[a,b,c] = a*(b*c)
    bad = np.argwhere(left != right)
    if len(bad):
        a, b, c = (int(x) for x in bad[0])
        report.add("Associativity", "(%d*%d)*%d != %d*(%d*%d)" % (a, b, c, a, b, c))
    if not np.array_equal(t[g.identity], np.arange(n)) or \
            not np.array_equal(t[:, g.identity], np.arange(n)):
        report.add("Identity", "element 0 is not a two-sided identity")
    for a in range(n):
        b = g.inv(a)
        if g.mul(a, b) != g.identity or g.mul(b, a) != g.identity:
            report.add("Inverse", "element %d has a bad inverse" % a)
    covered = set()
    for cls in g.conjugacy_classes:
        if covered & cls:
            report.add("ClassPartition", "conjugacy classes overlap")
        covered |= cls
        for a in cls:
            for x in range(n):
                if g.mul(g.mul(x, a), g.inv(x)) not in cls:
                    report.add("ClassClosure",
                               "class of %d not closed under conjugation by %d" % (a, x))
                    break
    if covered != set(range(n)):
        report.add("ClassPartition", "conjugacy classes do not cover the group")
    return report


@dataclass(frozen=True)
class LaplacianSpec:
    """Generating set for the Cayley Laplacian of a finite group.

    Must be symmetric (closed under inversion), closed under conjugation,
    generate the group, and exclude the identity.  U(1) needs no spec.
    """

    generators: Tuple[int, ...]


def default_laplacian_spec(group: StructureGroup) -> Optional[LaplacianSpec]:
    if isinstance(group, U1Truncated):
        return None
    name = group.name
    if name.startswith("Z"):
        n = group.order
        gens = (1,) if n == 2 else (1, n - 1)
        return LaplacianSpec(gens)
    if name.startswith("D"):
        n = group.order // 2
        reflections = tuple(range(n, 2 * n))
        rotations = (1,) if n == 2 else (1, n - 1)
        return LaplacianSpec(tuple(sorted(set(reflections + rotations))))
    if name == "Q8":
        return LaplacianSpec((2, 3, 4, 5, 6, 7))  # the classes {+-i,+-j,+-k}
    raise SpecInvalid("no default generating set for group %r" % name)


def verify_laplacian_spec(group: FiniteGroup, spec: LaplacianSpec) -> ValidationReport:
    report = ValidationReport(subject="laplacian spec for %s" % group.name)
    gens = set(spec.generators)
    if not gens:
        report.add("Empty", "generating set is empty")
        return report
    if group.identity in gens:
        report.add("ContainsIdentity", "generating set contains the identity")
    for s in gens:
        if not (0 <= s < group.order):
            report.add("OutOfRange", "generator %d out of range" % s)
            return report
    if {group.inv(s) for s in gens} != gens:
        report.add("NotSymmetric", "generating set is not closed under inversion")
    for x in range(group.order):
        conjugated = {group.mul(group.mul(x, s), group.inv(x)) for s in gens}
        if conjugated != gens:
            report.add("ClassClosure",
                       "generating set not closed under conjugation by %d" % x)
            break
    reached = {group.identity}
    frontier = [group.identity]
    while frontier:
        a = frontier.pop()
        for s in gens:
            b = group.mul(s, a)
            if b not in reached:
                reached.add(b)
                frontier.append(b)
    if len(reached) != group.order:
        report.add("NotGenerating", "generating set reaches only %d of %d elements"
                   % (len(reached), group.order))
    return report


def one_site_laplacian(group: StructureGroup, spec: Optional[LaplacianSpec] = None,
                       *, enforce: bool = True) -> np.ndarray:
    """The bi-invariant one-site Laplacian as a dense symmetric matrix.

    Finite groups: (Df)(a) = sum_{s in S} (f(s a) - f(a)); truncated U(1):
    diagonal with entry -n^2 at mode n.  ``enforce=False`` skips spec
    validation (used to demonstrate why the invariants matter).
    """
    if isinstance(group, U1Truncated):
        return np.diag(np.array([-float(n * n) for n in group.modes]))
    if spec is None:
        spec = default_laplacian_spec(group)
    if enforce:
        report = verify_laplacian_spec(group, spec)
        if not report.ok:
            raise SpecInvalid(report.summary())
    n = group.order
    delta = np.zeros((n, n))
    for a in range(n):
        for s in spec.generators:
            delta[a, group.mul(s, a)] += 1.0
        delta[a, a] -= float(len(spec.generators))
    return delta


def haar_weights(group: StructureGroup) -> np.ndarray:
    """One-site basis weights: 1/|G| per element, or 1 per orthonormal mode."""
    if isinstance(group, U1Truncated):
        return np.ones(group.dim)
    return np.full(group.order, 1.0 / group.order)


def group_size(group: StructureGroup) -> int:
    return group.dim if isinstance(group, U1Truncated) else group.order
