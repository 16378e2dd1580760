"""
Hermitian eigendecomposition and the frame-theoretic quantities built on it.

A falsified verification is returned as a verdict, never raised: every
verify_* function hands back a record whose `holds` flag carries the answer.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.db import models

from .conf import gablab_settings
from .exceptions import ConvergenceError, NonHermitianError, NotAFrameError
from .gabor import (
    GaborSystem,
    Window,
    adjoint_atoms,
    frame_operator,
    frame_operator_from_atoms,
    gabor_atoms,
    gram,
)

logger = logging.getLogger(__name__)


class Convention(models.TextChoices):
    RAW = 'raw', 'Raw (weight 1)'
    PAPER = 'paper', 'Weighted by the lattice size d'


def convention_weight(sys, convention):
    if Convention(convention) == Convention.PAPER:
        return float(sys.density)
    return 1.0


# ============================================
# EIGENSOLVER
# ============================================

@dataclass(frozen=True, eq=False)
class Eigendecomposition:
    """Ascending eigenvalues and the eigenvectors as columns."""
    values: np.ndarray
    vectors: np.ndarray

    def __iter__(self):
        return iter((self.values, self.vectors))


def _check_hermitian(h):
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NonHermitianError(f"Expected a square matrix, got shape {h.shape}.")
    scale = np.linalg.norm(h)
    defect = np.linalg.norm(h - h.conj().T)
    if defect > 1e-12 * scale:
        raise NonHermitianError(
            f"Matrix is not Hermitian: ||H - H*|| = {defect:.3e} exceeds 1e-12 * ||H||."
        )
    return 0.5 * (h + h.conj().T)


def _off_diagonal_norm(a):
    return np.linalg.norm(a - np.diag(np.diag(a)))


def _jacobi(a, tol, max_sweeps):
    """Cyclic complex Jacobi; overwrites `a`."""
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    threshold = tol * np.linalg.norm(a)
    skip = threshold / max(n, 1)
    for sweep in range(max_sweeps + 1):
        off = _off_diagonal_norm(a)
        if off <= threshold:
            logger.debug("Jacobi converged after %d sweeps (n=%d, off=%.3e)", sweep, n, off)
            return np.real(np.diag(a)).copy(), v
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                magnitude = abs(apq)
                if magnitude <= skip:
                    continue
                phase = apq / magnitude
                tau = (a[q, q].real - a[p, p].real) / (2.0 * magnitude)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # J = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                rot = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ rot
                a[cols, :] = rot.conj().T @ a[cols, :]
                a[p, q] = a[q, p] = 0.0
                v[:, cols] = v[:, cols] @ rot
    raise ConvergenceError(
        f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal mass {off:.3e})."
    )


def hermitian_eig(h, solver=None):
    """
    Eigenvalues in ascending order and orthonormal eigenvectors (columns).
    """
    a = _check_hermitian(h)
    solver = solver or gablab_settings.EIGEN_SOLVER
    if a.shape[0] == 0:
        return Eigendecomposition(np.zeros(0), np.zeros((0, 0), dtype=np.complex128))
    if solver == 'lapack':
        values, vectors = np.linalg.eigh(a)
    else:
        values, vectors = _jacobi(
            a.copy(), gablab_settings.JACOBI_TOL, gablab_settings.JACOBI_MAX_SWEEPS
        )
        order = np.argsort(values, kind='stable')
        values, vectors = values[order], vectors[:, order]
    return Eigendecomposition(values, vectors)


# ============================================
# REPORTS
# ============================================

@dataclass(eq=False)
class SpectralReport:
    """
    Eigen-bounds of a frame operator or of a Gram matrix.
    """
    eigenvalues: np.ndarray
    rank: int
    lower: float
    upper: float
    is_frame: bool
    is_riesz_sequence: bool
    is_tight: bool
    tolerance: float

    def to_json(self):
        from .serializers import SpectralReportSerializer

        return SpectralReportSerializer(self).data


@dataclass(frozen=True)
class ExcessDeficit:
    excess: int
    deficit: int
    rank: int
    atom_count: int


def _rank(eigenvalues, tol=None):
    """Eigenvalues above tol * lambda_max, tol defaulting to RANK_TOL."""
    tol = gablab_settings.RANK_TOL if tol is None else tol
    if len(eigenvalues) == 0 or eigenvalues[-1] <= 0:
        return 0
    return int(np.count_nonzero(eigenvalues > tol * eigenvalues[-1]))


def _bounds(eigenvalues):
    if len(eigenvalues) == 0:
        return 0.0, 0.0
    return float(eigenvalues[0]), float(eigenvalues[-1])


def _tol(tol):
    return gablab_settings.RANK_TOL if tol is None else tol


def gram_spectrum(atoms):
    """
    Ascending Gram eigenvalues of the rows of `atoms`, computed through the
    smaller of the two products and padded with zeros.
    """
    atoms = np.atleast_2d(np.asarray(atoms, dtype=np.complex128))
    m, n = atoms.shape
    if m <= n:
        return hermitian_eig(gram(atoms)).values
    small = hermitian_eig(gram(atoms.T)).values
    return np.concatenate([np.zeros(m - n), small])


def family_frame_bounds(rows, weight=1.0, tol=None):
    """
    Bounds of the frame operator weight * sum_i f_i f_i^* of any finite family.
    """
    tol = _tol(tol)
    rows = np.atleast_2d(np.asarray(rows, dtype=np.complex128))
    values = hermitian_eig(frame_operator_from_atoms(rows, weight)).values
    lower, upper = _bounds(values)
    rank = _rank(values)
    return SpectralReport(
        eigenvalues=values,
        rank=rank,
        lower=lower,
        upper=upper,
        is_frame=bool(lower > tol * upper),
        is_riesz_sequence=rank == rows.shape[0],
        is_tight=bool(upper - lower <= tol * upper),
        tolerance=tol,
    )


def frame_bounds(sys, convention=Convention.PAPER, tol=None):
    """
    Bounds of weight * T*T, weight = 1 (raw) or d(Lambda x Gamma) (paper).
    """
    weight = convention_weight(sys, convention)
    report = family_frame_bounds(gabor_atoms(sys), weight, tol)
    logger.debug(
        "Frame bounds of %r (%s): A=%.6g B=%.6g", sys, convention, report.lower, report.upper
    )
    return report


def riesz_bounds(atoms, tol=None):
    """
    Bounds of the Gram matrix of the rows of `atoms`.
    """
    tol = _tol(tol)
    atoms = np.atleast_2d(np.asarray(atoms, dtype=np.complex128))
    values = gram_spectrum(atoms)
    lower, upper = _bounds(values)
    rank = _rank(values)
    return SpectralReport(
        eigenvalues=values,
        rank=rank,
        lower=lower,
        upper=upper,
        is_frame=rank == atoms.shape[1],
        is_riesz_sequence=bool(lower > tol * upper),
        is_tight=bool(upper - lower <= tol * upper),
        tolerance=tol,
    )


def excess_deficit(atoms, tol=None):
    atoms = np.atleast_2d(np.asarray(atoms, dtype=np.complex128))
    values = gram_spectrum(atoms)
    rank = _rank(values, tol)
    m, n = atoms.shape
    return ExcessDeficit(excess=m - rank, deficit=n - rank, rank=rank, atom_count=m)


def inverse_sqrt(matrix):
    """S^{-1/2} for a positive definite Hermitian S."""
    values, vectors = hermitian_eig(matrix)
    return (vectors * (1.0 / np.sqrt(values))[None, :]) @ vectors.conj().T


def canonical_parseval(sys, convention=Convention.PAPER, tol=None):
    """
    The canonical tight window S^{-1/2} g, with S weighted by the convention.
    """
    report = frame_bounds(sys, convention, tol)
    if not report.is_frame:
        raise NotAFrameError(
            f"{sys!r} is not a frame (A={report.lower:.3e}, B={report.upper:.3e})."
        )
    weight = convention_weight(sys, convention)
    tightened = inverse_sqrt(frame_operator(sys, weight)) @ sys.window.values
    return Window(sys.group, tightened)


# ============================================
# DUALITY VERIFICATIONS
# ============================================

@dataclass(eq=False)
class DualityVerdict:
    frame: SpectralReport
    riesz: SpectralReport
    lower_gap: float
    upper_gap: float
    holds: bool
    tolerance: float


@dataclass(eq=False)
class TightnessVerdict:
    frame: SpectralReport
    tight: bool
    orthogonal: bool
    off_diagonal: float
    energy: float
    bound_gap: float
    holds: bool
    tolerance: float


@dataclass(eq=False)
class BesselVerdict:
    frame_upper: float
    riesz_upper: float
    gap: float
    holds: bool
    tolerance: float


def _scale(*values):
    return max(max(values), np.finfo(float).tiny)


def verify_duality(g, time_lattice, freq_lattice, tol=None):
    """
    Frame bounds of the system (paper convention) against the Riesz bounds
    of its adjoint system.
    """
    tol = gablab_settings.DEFAULT_TOL if tol is None else tol
    sys = GaborSystem(g, time_lattice, freq_lattice)
    frame = frame_bounds(sys, Convention.PAPER, tol)
    riesz = riesz_bounds(adjoint_atoms(sys), tol)
    scale = _scale(frame.upper, riesz.upper)
    lower_gap = abs(frame.lower - riesz.lower)
    upper_gap = abs(frame.upper - riesz.upper)
    if frame.is_frame and riesz.is_riesz_sequence:
        holds = lower_gap <= tol * scale and upper_gap <= tol * scale
    else:
        holds = not frame.is_frame and not riesz.is_riesz_sequence
    if not holds:
        logger.warning(
            "Duality failed for %r: frame=%s riesz=%s gaps=(%.3e, %.3e)",
            sys, frame.is_frame, riesz.is_riesz_sequence, lower_gap, upper_gap,
        )
    return DualityVerdict(frame, riesz, lower_gap, upper_gap, bool(holds), tol)


def verify_tight_orthogonal(g, time_lattice, freq_lattice, tol=None):
    """
    Tightness of the system against orthogonality of its adjoint system,
    with the tight bound equal to ||g||^2.
    """
    tol = gablab_settings.DEFAULT_TOL if tol is None else tol
    sys = GaborSystem(g, time_lattice, freq_lattice)
    frame = frame_bounds(sys, Convention.PAPER, tol)
    adjoint_gram = gram(adjoint_atoms(sys))
    off = adjoint_gram - np.diag(np.diag(adjoint_gram))
    off_diagonal = float(np.max(np.abs(off))) if off.size else 0.0
    energy = g.energy
    orthogonal = off_diagonal <= tol * energy
    bound_gap = abs(frame.lower - energy)
    holds = frame.is_tight == orthogonal and (not frame.is_tight or bound_gap <= tol * energy)
    if not holds:
        logger.warning(
            "Tightness equivalence failed for %r: tight=%s orthogonal=%s",
            sys, frame.is_tight, orthogonal,
        )
    return TightnessVerdict(
        frame=frame,
        tight=frame.is_tight,
        orthogonal=bool(orthogonal),
        off_diagonal=off_diagonal,
        energy=energy,
        bound_gap=bound_gap,
        holds=bool(holds),
        tolerance=tol,
    )


def verify_bessel_duality(g, time_lattice, freq_lattice, tol=None):
    """
    The upper (Bessel) bound of the system equals that of its adjoint system,
    frame or not.
    """
    tol = gablab_settings.DEFAULT_TOL if tol is None else tol
    sys = GaborSystem(g, time_lattice, freq_lattice)
    frame = frame_bounds(sys, Convention.PAPER, tol)
    riesz_upper = float(gram_spectrum(adjoint_atoms(sys))[-1])
    gap = abs(frame.upper - riesz_upper)
    holds = gap <= tol * _scale(frame.upper, riesz_upper)
    return BesselVerdict(frame.upper, riesz_upper, gap, bool(holds), tol)
