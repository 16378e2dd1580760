"""
Windows, time-frequency shifts and Gabor systems on a finite abelian group.

Inner products use counting measure, <a, b> = sum_x a(x) conj(b(x)); all
normalization conventions live in the `weight` of `frame_operator` and in
the density module. Dense matrices throughout: atoms are the rows of an
M x N array, in lexicographic (flat index of lambda, flat index of gamma)
order.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import (
    GroupMismatchError,
    LengthMismatchError,
    NonPositiveWeightError,
    NotInLatticeError,
    SideMismatchError,
)
from .group import Elem, Side, annihilator, pairing
from .prng import XorShift64Star

logger = logging.getLogger(__name__)


# ============================================
# WINDOWS
# ============================================

class Window:
    """
    A complex function on G, stored by flat index.
    """

    def __init__(self, group, values):
        values = np.array(values, dtype=np.complex128).reshape(-1)
        if values.shape[0] != group.order:
            raise LengthMismatchError(
                f"A window on {group} needs {group.order} values, got {values.shape[0]}."
            )
        values.setflags(write=False)
        self.group = group
        self.values = values

    def __repr__(self):
        return f"<Window on {self.group} norm={self.norm:.6g}>"

    def __len__(self):
        return self.group.order

    @property
    def norm(self):
        return float(np.linalg.norm(self.values))

    @property
    def energy(self):
        return float(np.vdot(self.values, self.values).real)

    def inner(self, other):
        """<self, other>, linear in self."""
        _check_same_group(self.group, other.group)
        return complex(np.vdot(other.values, self.values))

    def scaled(self, factor):
        return Window(self.group, self.values * factor)


def _check_same_group(a, b):
    if a != b:
        raise GroupMismatchError(f"Objects on {a} and {b} cannot be combined.")


def delta_window(group, at=0):
    values = np.zeros(group.order, dtype=np.complex128)
    values[int(at)] = 1.0
    return Window(group, values)


def random_window(group, seed):
    """Complex window with real and imaginary parts uniform in [-1, 1)."""
    return Window(group, XorShift64Star(seed).complex_symmetric(group.order))


def integer_window(group, seed, low=-3, high=3):
    """Integer-valued real window, for exact-arithmetic cross checks."""
    return Window(group, XorShift64Star(seed).integers(low, high, group.order))


def window_from_values(group, pairs):
    """Build a window from [re, im] pairs."""
    values = [complex(re, im) for re, im in pairs]
    return Window(group, values)


def indicator(group, indices):
    values = np.zeros(group.order, dtype=np.complex128)
    values[np.asarray(indices, dtype=np.int64)] = 1.0
    return Window(group, values)


# ============================================
# TIME-FREQUENCY SHIFTS
# ============================================

def _check_elem(f, elem, side):
    if not isinstance(elem, Elem):
        raise TypeError(f"Expected an Elem, got {type(elem).__name__}.")
    _check_same_group(f.group, elem.group)
    if elem.side != side:
        raise SideMismatchError(f"Expected an element on the {side} side, got {elem.side}.")


def translate(f, u):
    """(T_u f)(x) = f(x - u)."""
    _check_elem(f, u, Side.PRIMAL)
    group = f.group
    source = group.sub_indices(np.arange(group.order), np.full(group.order, u.index))
    return Window(group, f.values[source])


def modulate(f, xi):
    """(E_xi f)(x) = xi(x) f(x)."""
    _check_elem(f, xi, Side.DUAL)
    group = f.group
    chars = group.roots[group.phase(np.full(group.order, xi.index), np.arange(group.order))]
    return Window(group, chars * f.values)


def commutation_defect(lam, gamma, f):
    """
    || E_gamma T_lambda f - gamma(lambda) T_lambda E_gamma f ||.
    """
    left = modulate(translate(f, lam), gamma).values
    right = pairing(gamma, lam) * translate(modulate(f, gamma), lam).values
    return float(np.linalg.norm(left - right))


# ============================================
# GABOR SYSTEMS
# ============================================

def shift_matrix(values, group, lam_indices, gamma_indices):
    """Rows E_gamma T_lambda g, lambda-major."""
    x = np.arange(group.order)
    lam_indices = np.asarray(lam_indices, dtype=np.int64)
    gamma_indices = np.asarray(gamma_indices, dtype=np.int64)
    shifted = values[group.sub_indices(x[None, :], lam_indices[:, None])]
    chars = group.roots[group.phase(gamma_indices[:, None], x[None, :])]
    atoms = shifted[:, None, :] * chars[None, :, :]
    return atoms.reshape(len(lam_indices) * len(gamma_indices), group.order)


@dataclass(frozen=True, eq=False)
class GaborSystem:
    """
    {E_gamma T_lambda g} over a time lattice in G and a frequency lattice in G^.
    """
    window: Window
    time_lattice: object
    freq_lattice: object

    def __post_init__(self):
        group = self.window.group
        for lattice in (self.time_lattice, self.freq_lattice):
            _check_same_group(group, lattice.group)
        if self.time_lattice.side != Side.PRIMAL:
            raise SideMismatchError('The time lattice must be a subgroup of G.')
        if self.freq_lattice.side != Side.DUAL:
            raise SideMismatchError('The frequency lattice must be a subgroup of G^.')

    def __repr__(self):
        return (
            f"<GaborSystem on {self.group} |Lambda|={self.time_lattice.order} "
            f"|Gamma|={self.freq_lattice.order}>"
        )

    @property
    def group(self):
        return self.window.group

    @property
    def atom_count(self):
        return self.time_lattice.order * self.freq_lattice.order

    @property
    def density(self):
        """d(Lambda x Gamma) = N / (|Lambda| |Gamma|), exact."""
        return Fraction(self.group.order, self.atom_count)

    @property
    def labels(self):
        """(lambda index, gamma index) in atom order."""
        return [
            (int(lam), int(gam))
            for lam in self.time_lattice.indices
            for gam in self.freq_lattice.indices
        ]

    def with_window(self, window):
        return GaborSystem(window, self.time_lattice, self.freq_lattice)

    def adjoint(self):
        """The same window on the adjoint lattice Gamma^perp x Lambda^perp."""
        return GaborSystem(
            self.window, annihilator(self.freq_lattice), annihilator(self.time_lattice)
        )


def gabor_atoms(sys):
    return shift_matrix(
        sys.window.values, sys.group, sys.time_lattice.indices, sys.freq_lattice.indices
    )


def adjoint_atoms(sys):
    """Rows E_beta T_alpha g for (alpha, beta) in Gamma^perp x Lambda^perp."""
    return gabor_atoms(sys.adjoint())


# ============================================
# COEFFICIENTS AND OPERATORS
# ============================================

class CoefficientArray:
    """
    An element of l2(Lambda x Gamma), stored in atom order.
    """

    def __init__(self, system, values):
        values = np.array(values, dtype=np.complex128).reshape(-1)
        if values.shape[0] != system.atom_count:
            raise LengthMismatchError(
                f"Expected {system.atom_count} coefficients, got {values.shape[0]}."
            )
        self.system = system
        self.values = values

    def __repr__(self):
        return f"<CoefficientArray length={len(self.values)}>"

    @property
    def norm(self):
        return float(np.linalg.norm(self.values))

    def as_grid(self):
        """|Lambda| x |Gamma| view."""
        return self.values.reshape(self.system.time_lattice.order, self.system.freq_lattice.order)

    @classmethod
    def kronecker(cls, system, lam, gamma):
        """The basis vector e_{lambda' gamma'}."""
        values = np.zeros(system.atom_count, dtype=np.complex128)
        values[system.labels.index((lam.index, gamma.index))] = 1.0
        return cls(system, values)


def analysis(sys, f):
    """c_{lambda gamma} = <f, E_gamma T_lambda g>."""
    _check_same_group(sys.group, f.group)
    return CoefficientArray(sys, np.conj(gabor_atoms(sys)) @ f.values)


def synthesis(sys, c):
    """sum c_{lambda gamma} E_gamma T_lambda g."""
    values = c.values if isinstance(c, CoefficientArray) else np.asarray(c)
    if values.shape[0] != sys.atom_count:
        raise LengthMismatchError(
            f"Expected {sys.atom_count} coefficients, got {values.shape[0]}."
        )
    return Window(sys.group, gabor_atoms(sys).T @ values)


def _hermitize(matrix):
    return 0.5 * (matrix + matrix.conj().T)


def frame_operator_from_atoms(atoms, weight=1.0):
    return _hermitize(weight * (atoms.T @ np.conj(atoms)))


def frame_operator(sys, weight=1.0):
    """weight * sum over atoms of (atom)(atom)^*."""
    if not weight > 0:
        raise NonPositiveWeightError(f"The frame operator weight must be positive, got {weight}.")
    return frame_operator_from_atoms(gabor_atoms(sys), weight)


def gram(atoms):
    """G_ij = <atom_i, atom_j>."""
    atoms = np.atleast_2d(np.asarray(atoms, dtype=np.complex128))
    return _hermitize(atoms @ atoms.conj().T)


def cross_frame_operator(f, h, time_lattice, freq_lattice):
    """T*_f T_h: x -> sum <x, E_gamma T_lambda h> E_gamma T_lambda f."""
    _check_same_group(f.group, h.group)
    atoms_f = gabor_atoms(GaborSystem(f, time_lattice, freq_lattice))
    atoms_h = gabor_atoms(GaborSystem(h, time_lattice, freq_lattice))
    return atoms_f.T @ np.conj(atoms_h)


# ============================================
# INTERTWINING OPERATORS
# ============================================

def _lattice_position(lattice, elem):
    if elem not in lattice:
        raise NotInLatticeError(f"{elem} is not in the lattice {lattice}.")
    return int(np.searchsorted(lattice.indices, elem.index))


def intertwiner_U(lambda_prime, c):
    """(U c)_{lambda, gamma} = conj(gamma(lambda')) c_{lambda - lambda', gamma}."""
    sys = c.system
    lattice = sys.time_lattice
    _lattice_position(lattice, lambda_prime)
    group = sys.group
    source = group.sub_indices(lattice.indices, np.full(lattice.order, lambda_prime.index))
    rows = np.searchsorted(lattice.indices, source)
    phases = group.phase(sys.freq_lattice.indices, np.full(sys.freq_lattice.order, lambda_prime.index))
    grid = c.as_grid()[rows, :] * np.conj(group.roots[phases])[None, :]
    return CoefficientArray(sys, grid.reshape(-1))


def intertwiner_V(gamma_prime, c):
    """(V c)_{lambda, gamma} = c_{lambda, gamma - gamma'}."""
    sys = c.system
    lattice = sys.freq_lattice
    _lattice_position(lattice, gamma_prime)
    source = sys.group.sub_indices(lattice.indices, np.full(lattice.order, gamma_prime.index))
    cols = np.searchsorted(lattice.indices, source)
    return CoefficientArray(sys, c.as_grid()[:, cols].reshape(-1))


def intertwining_defect(sys, lambda_prime, gamma_prime, f):
    """
    Relative defects of T T_{lambda'} = U_{lambda'} T and T E_{gamma'} = V_{gamma'} T
    on the probe f, as a pair.
    """
    base = analysis(sys, f)
    scale = max(base.norm, np.finfo(float).tiny)
    shifted = analysis(sys, translate(f, lambda_prime)).values
    modulated = analysis(sys, modulate(f, gamma_prime)).values
    u_defect = np.linalg.norm(shifted - intertwiner_U(lambda_prime, base).values) / scale
    v_defect = np.linalg.norm(modulated - intertwiner_V(gamma_prime, base).values) / scale
    return float(u_defect), float(v_defect)
