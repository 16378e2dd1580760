"""
Finite abelian groups G = Z_{n_1} x ... x Z_{n_k} and their duals.

The dual group is identified with the same moduli tuple through the pairing
xi(x) = exp(2 pi i sum_j xi_j x_j / n_j); a side tag keeps elements of G and
of its dual apart. Elements are addressed by their mixed-radix row-major flat
index, and every element list in this module is sorted by that index.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from django.db import models

from .conf import gablab_settings
from .exceptions import (
    ArityMismatchError,
    EmptyModuliError,
    ForeignElementError,
    GroupMismatchError,
    InvalidModulusError,
    OrderCapExceededError,
    SideMismatchError,
)

logger = logging.getLogger(__name__)


class Side(models.TextChoices):
    PRIMAL = 'primal', 'Primal (G)'
    DUAL = 'dual', 'Dual (G^)'


def opposite(side):
    return Side.DUAL if side == Side.PRIMAL else Side.PRIMAL


# ============================================
# GROUPS AND ELEMENTS
# ============================================

@dataclass(frozen=True)
class GroupSpec:
    """
    A finite abelian group given by its cyclic moduli.
    """
    moduli: tuple

    def __str__(self):
        return ' x '.join(f'Z{n}' for n in self.moduli)

    @property
    def order(self):
        return math.prod(self.moduli)

    @property
    def arity(self):
        return len(self.moduli)

    @cached_property
    def strides(self):
        """Mixed-radix row-major weights: idx(x) = sum_j x_j * prod_{l>j} n_l."""
        strides = []
        acc = 1
        for n in reversed(self.moduli):
            strides.append(acc)
            acc *= n
        return np.array(list(reversed(strides)), dtype=np.int64)

    @cached_property
    def moduli_array(self):
        return np.array(self.moduli, dtype=np.int64)

    @cached_property
    def residues(self):
        """N x k table of the residue tuple of every flat index."""
        index = np.arange(self.order, dtype=np.int64)
        return (index[:, None] // self.strides[None, :]) % self.moduli_array[None, :]

    @cached_property
    def phase_weights(self):
        """N / n_j, so that the pairing phase is an exact integer mod N."""
        return np.array([self.order // n for n in self.moduli], dtype=np.int64)

    @cached_property
    def roots(self):
        """The N-th roots of unity, roots[k] = exp(2 pi i k / N)."""
        return np.exp(2j * np.pi * np.arange(self.order) / self.order)

    def flat(self, residues):
        """Flat index of one residue tuple or of a stack of them."""
        residues = np.asarray(residues, dtype=np.int64) % self.moduli_array
        return residues @ self.strides

    def add_indices(self, a, b):
        res = self.residues[np.asarray(a)] + self.residues[np.asarray(b)]
        return self.flat(res)

    def sub_indices(self, a, b):
        res = self.residues[np.asarray(a)] - self.residues[np.asarray(b)]
        return self.flat(res)

    def neg_indices(self, a):
        return self.flat(-self.residues[np.asarray(a)])

    def phase(self, xi_index, x_index):
        """Integer k with pairing(xi, x) = exp(2 pi i k / N)."""
        xi_res = self.residues[np.asarray(xi_index)] * self.phase_weights
        x_res = self.residues[np.asarray(x_index)]
        return np.sum(xi_res * x_res, axis=-1) % self.order

    def element(self, index, side=Side.PRIMAL):
        return Elem(self, tuple(int(r) for r in self.residues[int(index)]), Side(side))

    def elem(self, residues, side=Side.PRIMAL):
        if isinstance(residues, int):
            residues = (residues,)
        return Elem(self, tuple(int(r) for r in residues), Side(side))

    def zero(self, side=Side.PRIMAL):
        return self.element(0, side)


@dataclass(frozen=True)
class Elem:
    """
    An element x of G (primal side) or a character xi of G^ (dual side).
    """
    group: GroupSpec
    residues: tuple
    side: str = Side.PRIMAL

    def __post_init__(self):
        if len(self.residues) != self.group.arity:
            raise ArityMismatchError(
                f"Element {self.residues} has {len(self.residues)} residues, "
                f"the group {self.group} needs {self.group.arity}."
            )
        for r, n in zip(self.residues, self.group.moduli):
            if not 0 <= r < n:
                raise ForeignElementError(
                    f"Residue {r} is out of range for modulus {n}."
                )

    def __str__(self):
        return f"{self.side}{self.residues}"

    @property
    def index(self):
        return int(self.group.flat(self.residues))

    def _check_compatible(self, other):
        if self.group != other.group:
            raise GroupMismatchError(f"Elements of {self.group} and {other.group} cannot be combined.")
        if self.side != other.side:
            raise SideMismatchError("Cannot combine an element of G with a character of G^.")

    def __add__(self, other):
        self._check_compatible(other)
        return self.group.element(self.group.add_indices(self.index, other.index), self.side)

    def __sub__(self, other):
        self._check_compatible(other)
        return self.group.element(self.group.sub_indices(self.index, other.index), self.side)

    def __neg__(self):
        return self.group.element(self.group.neg_indices(self.index), self.side)

    def is_zero(self):
        return not any(self.residues)


def make_group(moduli):
    """
    Build a GroupSpec, enforcing the configured order cap.
    """
    moduli = list(moduli)
    if not moduli:
        raise EmptyModuliError('A group needs at least one cyclic factor.')
    for n in moduli:
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise InvalidModulusError(f"Modulus {n!r} must be an integer >= 1.")
    order = math.prod(moduli)
    cap = gablab_settings.MAX_ORDER
    if order > cap:
        raise OrderCapExceededError(
            f"Group order {order} exceeds the configured cap of {cap}."
        )
    return GroupSpec(tuple(int(n) for n in moduli))


def pairing(xi, x):
    """
    The character value xi(x) = exp(2 pi i sum_j xi_j x_j / n_j).
    """
    if xi.side != Side.DUAL or x.side != Side.PRIMAL:
        raise SideMismatchError('pairing takes a character of G^ and an element of G.')
    if xi.group != x.group:
        if xi.group.arity != x.group.arity:
            raise ArityMismatchError('Character and element have different arity.')
        raise GroupMismatchError('Character and element live on different groups.')
    group = xi.group
    return complex(group.roots[int(group.phase(xi.index, x.index))])


def character_table(group):
    """N x N matrix with entry [xi, x] = pairing(xi, x)."""
    weighted = group.residues * group.phase_weights
    phases = (weighted @ group.residues.T) % group.order
    return group.roots[phases]


# ============================================
# SUBGROUPS
# ============================================

def _closure(group, indices):
    """Smallest subgroup containing the given flat indices, as a sorted array."""
    members = np.zeros(group.order, dtype=bool)
    members[0] = True
    current = np.array([0], dtype=np.int64)
    for g in sorted({int(i) for i in indices}):
        if members[g]:
            continue
        # join with the cyclic group <g>: union of cosets k*g + current
        step = g
        while not members[step]:
            coset = group.add_indices(current, np.full(current.shape, step))
            members[coset] = True
            step = int(group.add_indices(step, g))
        current = np.flatnonzero(members)
    return np.flatnonzero(members)


def _greedy_generators(group, indices):
    """Deterministic generating set: scan elements by flat index, keep any not yet spanned."""
    generators = []
    spanned = np.zeros(group.order, dtype=bool)
    spanned[0] = True
    for i in indices:
        if not spanned[i]:
            generators.append(int(i))
            spanned[_closure(group, generators)] = True
    return generators


class Subgroup:
    """
    A subgroup of G (a time lattice) or of G^ (a frequency lattice).

    Equality only depends on the element set, not on the generators.
    """

    def __init__(self, group, side, indices, generators=None):
        self.group = group
        self.side = Side(side)
        self.indices = np.array(sorted(int(i) for i in indices), dtype=np.int64)
        self.indices.setflags(write=False)
        if generators is None:
            generators = _greedy_generators(group, self.indices)
        self.generators = tuple(
            g if isinstance(g, Elem) else group.element(g, self.side) for g in generators
        )

    def __eq__(self, other):
        if not isinstance(other, Subgroup):
            return NotImplemented
        return (
            self.group == other.group
            and self.side == other.side
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.group, self.side, self.indices.tobytes()))

    def __repr__(self):
        return f"<Subgroup {self.side} order={self.order} of {self.group}>"

    def __contains__(self, element):
        if isinstance(element, Elem):
            if element.group != self.group or element.side != self.side:
                return False
            element = element.index
        return bool(np.isin(int(element), self.indices))

    @property
    def order(self):
        return len(self.indices)

    @property
    def elements(self):
        return tuple(self.group.element(i, self.side) for i in self.indices)

    @property
    def sort_key(self):
        return (self.order, tuple(int(i) for i in self.indices))


def span_subgroup(group, side, generators):
    """
    The smallest subgroup containing the generators.
    """
    side = Side(side)
    gens = []
    for g in generators:
        if not isinstance(g, Elem):
            g = group.elem(g, side)
        if g.group != group:
            raise ForeignElementError(f"Generator {g} does not belong to {group}.")
        if g.side != side:
            raise SideMismatchError(f"Generator {g} is not on the {side} side.")
        gens.append(g)
    indices = _closure(group, [g.index for g in gens])
    return Subgroup(group, side, indices, generators=gens)


def annihilator(subgroup):
    """
    L^perp, by exact integer congruences: sum_j xi_j l_j N/n_j = 0 mod N
    for every generator l of L.
    """
    group = subgroup.group
    if subgroup.generators:
        gens = np.array([g.index for g in subgroup.generators], dtype=np.int64)
        phases = group.phase(np.arange(group.order)[:, None], gens[None, :])
        mask = np.all(phases == 0, axis=1)
    else:
        mask = np.ones(group.order, dtype=bool)
    return Subgroup(group, opposite(subgroup.side), np.flatnonzero(mask))


@dataclass(frozen=True)
class Section:
    """
    A transversal of G / L: one representative per coset.
    """
    subgroup: Subgroup
    rep_indices: tuple

    @property
    def reps(self):
        group = self.subgroup.group
        return tuple(group.element(i, self.subgroup.side) for i in self.rep_indices)

    @property
    def size(self):
        return len(self.rep_indices)

    def index_array(self):
        return np.array(self.rep_indices, dtype=np.int64)


def section(subgroup):
    """
    Canonical section: the minimal flat index of every coset.
    """
    group = subgroup.group
    covered = np.zeros(group.order, dtype=bool)
    reps = []
    for x in range(group.order):
        if covered[x]:
            continue
        reps.append(x)
        covered[group.add_indices(np.full(subgroup.order, x), subgroup.indices)] = True
    return Section(subgroup, tuple(reps))


def enumerate_subgroups(group, side=Side.PRIMAL):
    """
    Every subgroup, ordered by (order, element list).
    """
    cap = gablab_settings.EXHAUSTIVE_MAX_ORDER
    if group.order > cap:
        raise OrderCapExceededError(
            f"Exhaustive enumeration is capped at order {cap}, got {group.order}."
        )
    trivial = np.array([0], dtype=np.int64)
    found = {trivial.tobytes(): trivial}
    queue = [trivial]
    while queue:
        current = queue.pop()
        members = np.zeros(group.order, dtype=bool)
        members[current] = True
        for x in range(group.order):
            if members[x]:
                continue
            joined = _closure(group, list(current) + [x])
            key = joined.tobytes()
            # joins by x and by anything in x + current coincide
            members[group.add_indices(np.full(len(current), x), current)] = True
            if key not in found:
                found[key] = joined
                queue.append(joined)
    subgroups = [Subgroup(group, side, indices) for indices in found.values()]
    subgroups.sort(key=lambda s: s.sort_key)
    logger.debug("Enumerated %d subgroups of %s", len(subgroups), group)
    return subgroups


# ============================================
# MEASURES AND WEIL'S FORMULA
# ============================================

class MeasureConvention:
    """
    Counting measure on G, counting measure divided by N on G^.
    """
    primal_weight = Fraction(1)

    def __init__(self, group):
        self.group = group
        self.dual_weight = Fraction(1, group.order)

    def weight(self, side):
        return self.primal_weight if side == Side.PRIMAL else self.dual_weight

    def measure(self, sec):
        """mu(S_L) for a section S_L of G / L (or of G^ / L)."""
        return self.weight(sec.subgroup.side) * sec.size


def measure(sec):
    return MeasureConvention(sec.subgroup.group).measure(sec)


def weil_sum(values, subgroup):
    """
    sum_{r in S_L} sum_{l in L} f(r + l), to be compared with sum_x f(x).
    """
    group = subgroup.group
    values = np.asarray(values)
    total = values.dtype.type(0)
    for r in section(subgroup).rep_indices:
        coset = group.add_indices(np.full(subgroup.order, r), subgroup.indices)
        total = total + values[coset].sum()
    return total


# ============================================
# JSON ENCODINGS
# ============================================

def elem_to_json(elem):
    return list(elem.residues)


def group_to_json(group):
    return {'moduli': list(group.moduli)}


def subgroup_to_json(subgroup):
    return {'generators': [elem_to_json(g) for g in subgroup.generators]}
