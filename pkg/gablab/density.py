"""
Lattice size, section coverings and the completeness functional psi.

The frame operator inside the regularized resolvent R_theta = theta I + S is
the raw (weight 1) one; the factor 1/d is carried explicitly wherever psi is
compared with an inner product.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .conf import gablab_settings
from .exceptions import (
    GablabError,
    GroupMismatchError,
    InvalidThetaError,
    LengthMismatchError,
    SideMismatchError,
)
from .gabor import GaborSystem, Window, cross_frame_operator, frame_operator
from .group import Side, annihilator, measure, section
from .spectral import hermitian_eig

logger = logging.getLogger(__name__)


# ============================================
# LATTICE SIZE
# ============================================

@dataclass(frozen=True)
class LatticeSize:
    numerator: int
    denominator: int

    def __str__(self):
        return str(self.value)

    @property
    def value(self):
        return Fraction(self.numerator, self.denominator)

    @property
    def inverse(self):
        return 1 / self.value

    def __float__(self):
        return float(self.value)


def _check_lattices(time_lattice, freq_lattice):
    if time_lattice.side != Side.PRIMAL or freq_lattice.side != Side.DUAL:
        raise SideMismatchError('Expected a time lattice in G and a frequency lattice in G^.')
    if time_lattice.group != freq_lattice.group:
        raise GroupMismatchError('Both lattices must live on the same group.')


def lattice_size(time_lattice, freq_lattice):
    """
    d(Lambda x Gamma) = mu_G(S_Lambda) mu_G^(S_Gamma) = N / (|Lambda| |Gamma|).
    """
    _check_lattices(time_lattice, freq_lattice)
    value = measure(section(time_lattice)) * measure(section(freq_lattice))
    return LatticeSize(value.numerator, value.denominator)


def adjoint_lattice_size(time_lattice, freq_lattice):
    """d(Gamma^perp x Lambda^perp), the reciprocal of d(Lambda x Gamma)."""
    _check_lattices(time_lattice, freq_lattice)
    return lattice_size(annihilator(freq_lattice), annihilator(time_lattice))


# ============================================
# COVERINGS AND PSI
# ============================================

@dataclass(frozen=True, eq=False)
class Covering:
    """
    Cells E_i = (alpha_i + S_{Gamma^perp}) cap S_Lambda, nonempty only.
    """
    alphas: tuple
    cells: tuple
    section_indices: tuple
    section_measure: Fraction
    order: int

    @property
    def size(self):
        return len(self.cells)


def covering(time_lattice, freq_lattice):
    _check_lattices(time_lattice, freq_lattice)
    group = time_lattice.group
    time_section = section(time_lattice)
    perp = annihilator(freq_lattice)
    perp_reps = section(perp).index_array()
    in_section = np.zeros(group.order, dtype=bool)
    in_section[time_section.index_array()] = True

    alphas, cells = [], []
    seen = np.zeros(group.order, dtype=int)
    for alpha in perp.indices:
        shifted = group.add_indices(np.full(len(perp_reps), alpha), perp_reps)
        cell = np.sort(shifted[in_section[shifted]])
        if len(cell):
            alphas.append(group.element(alpha, Side.PRIMAL))
            cells.append(cell)
            seen[cell] += 1
    if np.any(seen[in_section] != 1) or np.any(seen[~in_section]):
        raise GablabError('Covering cells do not partition the section.')
    logger.debug("Covering of %d cells for |Lambda|=%d", len(cells), time_lattice.order)
    return Covering(
        alphas=tuple(alphas),
        cells=tuple(cells),
        section_indices=time_section.rep_indices,
        section_measure=measure(time_section),
        order=group.order,
    )


def psi(operator, cov):
    """psi(T) = (1 / mu(S_Lambda)) sum_i <T chi_{E_i}, chi_{E_i}>."""
    operator = np.asarray(operator)
    if operator.shape != (cov.order, cov.order):
        raise LengthMismatchError(
            f"psi needs a {cov.order} x {cov.order} operator, got {operator.shape}."
        )
    total = sum(operator[np.ix_(cell, cell)].sum() for cell in cov.cells)
    return complex(total) / float(cov.section_measure)


def psi_identity_defect(f, h, time_lattice, freq_lattice):
    """
    |psi(T*_f T_h) - (1/d) <f, h>|, relative to ||f|| ||h|| / d.
    """
    d = lattice_size(time_lattice, freq_lattice)
    cov = covering(time_lattice, freq_lattice)
    value = psi(cross_frame_operator(f, h, time_lattice, freq_lattice), cov)
    expected = float(d.inverse) * f.inner(h)
    scale = float(d.inverse) * f.norm * h.norm
    return abs(value - expected) / scale if scale > 0 else abs(value - expected)


# ============================================
# REGULARIZED RESOLVENT
# ============================================

class Resolvent:
    """
    (theta I + S)^-1 for the raw frame operator S, from one eigendecomposition.
    Eigenvalues within rounding of zero (16 N eps lambda_max) are set to zero; the
    span of the atoms keeps those above RANK_TOL * lambda_max.
    """

    def __init__(self, sys):
        self.system = sys
        values, self.vectors = hermitian_eig(frame_operator(sys))
        top = max(values[-1], 0.0) if len(values) else 0.0
        floor = 16 * len(values) * np.finfo(float).eps * top
        self.values = np.where(values > floor, values, 0.0)
        self.cutoff = gablab_settings.RANK_TOL * top

    def solve(self, f, theta):
        if not theta > 0:
            raise InvalidThetaError(f"theta must be positive, got {theta}.")
        coords = self.vectors.conj().T @ f.values
        return Window(f.group, self.vectors @ (coords / (theta + self.values)))

    def damped(self, theta):
        """S R_theta^-1."""
        weights = self.values / (theta + self.values)
        return (self.vectors * weights[None, :]) @ self.vectors.conj().T

    def projection(self):
        """Orthogonal projection onto the span of the atoms."""
        keep = self.values > self.cutoff
        basis = self.vectors[:, keep]
        return basis @ basis.conj().T, int(np.count_nonzero(keep))

    @property
    def smallest_positive(self):
        """Smallest eigenvalue inside the atom span, inf when the span is empty."""
        kept = self.values[self.values > self.cutoff]
        return float(kept[0]) if len(kept) else math.inf


def regularized_vector(g, time_lattice, freq_lattice, f, theta):
    """h_theta = (theta I + S_raw)^-1 f."""
    return Resolvent(GaborSystem(g, time_lattice, freq_lattice)).solve(f, theta)


def validate_theta_grid(grid):
    grid = [float(theta) for theta in grid]
    if not grid:
        raise InvalidThetaError('The theta grid is empty.')
    if any(not theta > 0 for theta in grid):
        raise InvalidThetaError('Every theta must be positive.')
    if any(a <= b for a, b in zip(grid, grid[1:])):
        raise InvalidThetaError('The theta grid must be strictly descending.')
    return grid


@dataclass(eq=False)
class ThetaSweep:
    thetas: list
    inner_products: list
    psi_values: list
    d_inverse: Fraction
    psi_limit: float
    complete: bool
    identity_defects: list = field(default_factory=list)
    decomposition_defects: list = field(default_factory=list)
    smallest_positive: float = math.inf

    def rows(self):
        """(theta, inner_product, psi, bound_1_over_d, identity_defect) per theta."""
        bound = float(self.d_inverse)
        return [
            (theta, ip, value, bound, defect)
            for theta, ip, value, defect in zip(
                self.thetas, self.inner_products, self.psi_values, self.identity_defects
            )
        ]

    @property
    def max_identity_defect(self):
        return max(self.identity_defects, default=0.0)

    @property
    def limit_gap(self):
        """psi(P) - psi(S R_theta^-1) at the last theta."""
        return self.psi_limit - self.psi_values[-1] if self.psi_values else 0.0

    @property
    def limit_bound(self):
        """
        theta / (theta + lambda_min^+) psi(P), the exact ceiling of limit_gap
        since psi is positive on positive operators.
        """
        if not self.thetas:
            return 0.0
        theta = self.thetas[-1]
        return theta / (theta + self.smallest_positive) * self.psi_limit

    @property
    def reaches_limit(self):
        return self.limit_gap <= self.limit_bound + 1e-9 * max(1.0, abs(self.psi_limit))

    @property
    def bounded(self):
        """psi <= 1/d and <f, h_theta> <= 1 on the whole grid."""
        bound = float(self.d_inverse)
        return all(value <= bound + 1e-9 for value in self.psi_values) and all(
            ip <= 1 + 1e-12 for ip in self.inner_products
        )


def completeness_sweep(g, time_lattice, freq_lattice, theta_grid=None):
    """
    Follow psi(S R_theta^-1) = (1/d) <g, h_theta> as theta decreases toward
    the exact limit psi(P), P the projection onto the atom span.
    """
    grid = validate_theta_grid(gablab_settings.THETA_GRID if theta_grid is None else theta_grid)
    sys = GaborSystem(g, time_lattice, freq_lattice)
    d_inverse = lattice_size(time_lattice, freq_lattice).inverse
    cov = covering(time_lattice, freq_lattice)
    resolvent = Resolvent(sys)
    projection, rank = resolvent.projection()
    operator = frame_operator(sys)
    tiny = np.finfo(float).tiny

    sweep = ThetaSweep(
        thetas=grid,
        inner_products=[],
        psi_values=[],
        d_inverse=d_inverse,
        psi_limit=psi(projection, cov).real,
        complete=rank == g.group.order,
        smallest_positive=resolvent.smallest_positive,
    )
    for theta in grid:
        h = resolvent.solve(g, theta)
        inner = g.inner(h).real
        value = psi(resolvent.damped(theta), cov).real
        expected = float(d_inverse) * inner
        sweep.inner_products.append(inner)
        sweep.psi_values.append(value)
        sweep.identity_defects.append(abs(value - expected) / max(abs(expected), tiny))
        # <g, h> = theta ||h||^2 + ||T h||^2
        decomposition = theta * h.energy + np.vdot(h.values, operator @ h.values).real
        sweep.decomposition_defects.append(abs(inner - decomposition) / max(abs(inner), tiny))
    logger.info(
        "Completeness sweep on %r: psi(P)=%.6g, 1/d=%s, max defect %.3e",
        sys, sweep.psi_limit, d_inverse, sweep.max_identity_defect,
    )
    return sweep


@dataclass(frozen=True)
class CompletenessVerdict:
    complete: bool
    rank: int
    atom_count: int
    lattice_size: Fraction
    counting_witness: bool
    holds: bool


def completeness_verdict(g, time_lattice, freq_lattice):
    """
    A complete Gabor system has d(Lambda x Gamma) <= 1; when d > 1 there are
    fewer atoms than dimensions.
    """
    sys = GaborSystem(g, time_lattice, freq_lattice)
    _, rank = Resolvent(sys).projection()
    n = g.group.order
    d = sys.density
    complete = rank == n
    return CompletenessVerdict(
        complete=complete,
        rank=rank,
        atom_count=sys.atom_count,
        lattice_size=d,
        counting_witness=d <= 1 or sys.atom_count < n,
        holds=not (complete and d > 1),
    )
