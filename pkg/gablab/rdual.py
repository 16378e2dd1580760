"""
R-dual sequences and the R-duality of Gabor systems and their adjoints.

Given orthonormal bases {e_j} of C^N and an orthonormal family {h_i} in some
C^K, the R-dual of {f_i} is w_j = sum_i <f_i, e_j> h_i. Coefficient-indexed
families can have more members than N, so the ambient space of the h's is
an arbitrary C^K and L2(G) sits inside it as the first N coordinates.
"""
import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np

from .conf import gablab_settings
from .exceptions import (
    LatticeMismatchError,
    LengthMismatchError,
    NotOrthonormalError,
    NotParsevalError,
    NotTightError,
    ResidualExceededError,
)
from .gabor import (
    GaborSystem,
    Window,
    adjoint_atoms,
    gabor_atoms,
    gram,
    indicator,
    shift_matrix,
)
from .group import annihilator, section
from .prng import XorShift64Star
from .spectral import (
    Convention,
    SpectralReport,
    family_frame_bounds,
    frame_bounds,
    riesz_bounds,
)

logger = logging.getLogger(__name__)


# ============================================
# ORTHONORMAL FAMILIES
# ============================================

class OrthonormalSystem:
    """
    Orthonormal rows in C^K, not necessarily spanning.
    """

    def __init__(self, vectors, labels=None, group=None, tol=None):
        vectors = np.atleast_2d(np.array(vectors, dtype=np.complex128))
        tol = gablab_settings.ORTHONORMAL_TOL if tol is None else tol
        defect = gram_defect(vectors)
        if defect > tol:
            raise NotOrthonormalError(
                f"Rows are not orthonormal: max |Gram - I| = {defect:.3e} exceeds {tol:.1e}."
            )
        self.vectors = vectors
        self.labels = list(labels) if labels is not None else list(range(len(vectors)))
        if len(self.labels) != len(vectors):
            raise LengthMismatchError(
                f"Got {len(self.labels)} labels for {len(vectors)} vectors."
            )
        self.group = group
        self.defect = defect
        self.tol = tol

    def __repr__(self):
        return f"<{type(self).__name__} {self.size} vectors in C^{self.dimension}>"

    def __len__(self):
        return self.size

    @property
    def size(self):
        return self.vectors.shape[0]

    @property
    def dimension(self):
        return self.vectors.shape[1]

    def head(self, count):
        return OrthonormalSystem(self.vectors[:count], self.labels[:count], self.group, self.tol)


class OrthonormalBasis(OrthonormalSystem):
    """
    A complete orthonormal family: as many vectors as dimensions.
    """

    def __init__(self, vectors, labels=None, group=None, tol=None):
        super().__init__(vectors, labels, group, tol)
        if self.size != self.dimension:
            raise LengthMismatchError(
                f"A basis of C^{self.dimension} needs {self.dimension} vectors, got {self.size}."
            )


def gram_defect(vectors):
    """max |Gram(rows) - I|."""
    vectors = np.atleast_2d(vectors)
    if vectors.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(gram(vectors) - np.eye(vectors.shape[0]))))


def standard_basis(dimension, labels=None, group=None):
    return OrthonormalBasis(np.eye(dimension, dtype=np.complex128), labels, group)


def random_unitary(dimension, seed):
    """Haar-like unitary from the QR factorization of a seeded complex matrix."""
    z = XorShift64Star(seed).complex_symmetric(dimension * dimension).reshape(dimension, dimension)
    q, r = np.linalg.qr(z)
    diagonal = np.diag(r)
    phases = np.where(np.abs(diagonal) > 0, diagonal / np.abs(diagonal), 1.0)
    return q * phases[None, :]


def random_unitary_basis(dimension, seed, labels=None, group=None):
    return OrthonormalBasis(random_unitary(dimension, seed), labels, group)


def orthonormal_complement(rows, dimension):
    """
    Complete orthonormal rows to an orthonormal basis of C^dimension.

    Standard basis vectors are taken in order of largest residual against
    the current span and re-orthogonalized twice.
    """
    q = np.atleast_2d(np.asarray(rows, dtype=np.complex128)).reshape(-1, dimension)
    needed = dimension - q.shape[0]
    residual = np.eye(dimension, dtype=np.complex128) - q.conj().T @ q
    found = []
    for _ in range(needed):
        k = int(np.argmax(np.linalg.norm(residual, axis=1)))
        v = residual[k].copy()
        for _ in range(2):
            if q.shape[0]:
                v = v - q.T @ (np.conj(q) @ v)
        v = v / np.linalg.norm(v)
        found.append(v)
        q = np.vstack([q, v[None, :]])
        residual = residual - np.outer(residual @ np.conj(v), v)
    logger.debug("Built a complement of dimension %d in C^%d", needed, dimension)
    if not found:
        return np.zeros((0, dimension), dtype=np.complex128)
    return np.array(found)


def embed(rows, dimension):
    """Zero-pad rows of C^N into C^dimension."""
    rows = np.atleast_2d(rows)
    padded = np.zeros((rows.shape[0], dimension), dtype=np.complex128)
    padded[:, :rows.shape[1]] = rows
    return padded


def array_digest(array):
    """SHA-256 of the little-endian float64 (re, im interleaved) bytes."""
    data = np.ascontiguousarray(array, dtype='<c16')
    return hashlib.sha256(data.tobytes()).hexdigest()


# ============================================
# ABSTRACT R-DUALS
# ============================================

def _rows(family):
    if isinstance(family, OrthonormalSystem):
        return family.vectors
    if isinstance(family, (list, tuple)) and family and isinstance(family[0], Window):
        return np.array([f.values for f in family])
    return np.atleast_2d(np.asarray(family, dtype=np.complex128))


def rdual_sequence(family, e, h):
    """
    w_j = sum_i <f_i, e_j> h_i, as the rows of an N x K array.
    """
    f = _rows(family)
    if not isinstance(e, OrthonormalBasis):
        e = OrthonormalBasis(e)
    if not isinstance(h, OrthonormalSystem):
        h = OrthonormalSystem(h)
    if e.dimension != f.shape[1]:
        raise LengthMismatchError(
            f"The basis lives in C^{e.dimension}, the family in C^{f.shape[1]}."
        )
    if h.size != f.shape[0]:
        raise LengthMismatchError(
            f"Need one h per family member: {f.shape[0]} members, {h.size} h's."
        )
    coefficients = f @ np.conj(e.vectors).T
    return coefficients.T @ h.vectors


@dataclass(eq=False)
class CklVerdict:
    column_sums: np.ndarray
    frame: SpectralReport
    riesz: SpectralReport
    sums_within_bounds: bool
    holds: bool
    tolerance: float


def ckl_duality_check(family, e, h, tol=None):
    """
    {f_i} is a frame with bounds A, B iff its R-dual is a Riesz sequence
    with the same bounds; each column sum sum_i |<f_i, e_j>|^2 lies in [A, B].
    """
    tol = gablab_settings.DEFAULT_TOL if tol is None else tol
    f = _rows(family)
    if not isinstance(e, OrthonormalBasis):
        e = OrthonormalBasis(e)
    w = rdual_sequence(f, e, h)
    column_sums = np.sum(np.abs(f @ np.conj(e.vectors).T) ** 2, axis=0)
    frame = family_frame_bounds(f, tol=tol)
    riesz = riesz_bounds(w, tol)
    scale = max(frame.upper, riesz.upper, np.finfo(float).tiny)
    sums_within = bool(
        np.all(column_sums >= frame.lower - tol * scale)
        and np.all(column_sums <= frame.upper + tol * scale)
    )
    if frame.is_frame and riesz.is_riesz_sequence:
        holds = (
            abs(frame.lower - riesz.lower) <= tol * scale
            and abs(frame.upper - riesz.upper) <= tol * scale
        )
    else:
        holds = not frame.is_frame and not riesz.is_riesz_sequence
    return CklVerdict(column_sums, frame, riesz, sums_within, bool(holds and sums_within), tol)


# ============================================
# CRITICALLY SAMPLED R-DUALS
# ============================================

def section_gabor_basis(time_lattice):
    """
    {mu^-1/2 E_gamma T_lambda chi_S} over Lambda x Lambda^perp, where S is the
    canonical section of G / Lambda and mu = N / |Lambda| its measure.
    """
    group = time_lattice.group
    sec = section(time_lattice)
    mu = group.order / time_lattice.order
    chi = indicator(group, sec.index_array()).scaled(1.0 / np.sqrt(mu))
    sys = GaborSystem(chi, time_lattice, annihilator(time_lattice))
    return OrthonormalBasis(gabor_atoms(sys), sys.labels, group)


@dataclass(frozen=True)
class CriticalResidual:
    residual: float
    scale: float
    holds: bool
    tolerance: float


def verify_critical_rdual(f, time_lattice, freq_lattice=None, tol=None):
    """
    On Lambda x Lambda^perp the adjoint system is the system itself, and it is
    recovered exactly as the R-dual with respect to the section basis indexed
    through negatives, b_{lambda gamma} = mu^-1/2 E_{-gamma} T_{-lambda} chi_S.
    """
    tol = gablab_settings.DEFAULT_TOL if tol is None else tol
    perp = annihilator(time_lattice)
    if freq_lattice is not None and freq_lattice != perp:
        raise LatticeMismatchError(
            'The frequency lattice must be the annihilator of the time lattice.'
        )
    group = time_lattice.group
    sec = section(time_lattice)
    mu = group.order / time_lattice.order
    chi = indicator(group, sec.index_array()).values / np.sqrt(mu)
    basis = shift_matrix(
        chi, group, group.neg_indices(time_lattice.indices), group.neg_indices(perp.indices)
    )
    atoms = gabor_atoms(GaborSystem(f, time_lattice, perp))
    coefficients = atoms @ np.conj(basis).T
    recovered = coefficients.T @ basis
    residual = float(np.max(np.linalg.norm(recovered - atoms, axis=1)))
    scale = max(1.0, f.norm)
    return CriticalResidual(residual, scale, residual <= tol * scale, tol)


# ============================================
# TIGHT FRAMES AND THEIR ADJOINTS
# ============================================

def _adjoint_labels(sys, size):
    labels = sys.adjoint().labels
    return labels + [('filler', k) for k in range(size - len(labels))]


def _default_bases(sys, e, h_tilde, ambient):
    n = sys.group.order
    m = sys.atom_count
    if e is None:
        e = standard_basis(n, _adjoint_labels(sys, n), sys.group)
    if h_tilde is None:
        k = m if ambient is None else ambient
        if k < m:
            raise LengthMismatchError(f"The ambient dimension {k} is below the atom count {m}.")
        h_tilde = standard_basis(k, sys.labels + [('filler', i) for i in range(k - m)])
    if not isinstance(e, OrthonormalBasis) or e.dimension != n:
        raise LengthMismatchError(f"e must be an orthonormal basis of C^{n}.")
    if not isinstance(h_tilde, OrthonormalBasis) or h_tilde.dimension < m:
        raise LengthMismatchError(
            f"hTilde must be an orthonormal basis of C^K with K >= {m}."
        )
    return e, h_tilde


def w_sequence(sys, e, h_tilde):
    """
    w_{alpha beta} = sqrt(d) sum <E_gamma T_lambda g, e_{alpha beta}> h~_{lambda gamma},
    one row per adjoint lattice point.
    """
    adjoint_count = sys.group.order ** 2 // sys.atom_count
    coefficients = gabor_atoms(sys) @ np.conj(e.vectors[:adjoint_count]).T
    return np.sqrt(float(sys.density)) * (coefficients.T @ h_tilde.vectors[:sys.atom_count])


@dataclass(eq=False)
class ParsevalWReport:
    frame: SpectralReport
    parseval: bool
    gram_defect: float
    holds: bool
    tolerance: float


def parseval_w_orthonormality(g, time_lattice, freq_lattice, e=None, h_tilde=None, tol=None,
                              strict=True):
    """
    The w-sequence of a Parseval system is orthonormal; with strict=False
    the Gram defect is reported for any window.
    """
    tol = gablab_settings.DEFAULT_TOL if tol is None else tol
    sys = GaborSystem(g, time_lattice, freq_lattice)
    frame = frame_bounds(sys, Convention.PAPER, tol)
    parseval = frame.is_tight and abs(frame.lower - 1.0) <= tol and abs(frame.upper - 1.0) <= tol
    if strict and not parseval:
        raise NotParsevalError(
            f"{sys!r} is not Parseval (A={frame.lower:.6g}, B={frame.upper:.6g})."
        )
    e, h_tilde = _default_bases(sys, e, h_tilde, None)
    defect = gram_defect(w_sequence(sys, e, h_tilde))
    return ParsevalWReport(frame, bool(parseval), defect, defect <= tol, tol)


@dataclass(eq=False)
class RDualWitness:
    """
    Certificate that the adjoint system is an R-dual of a tight Gabor frame.
    """
    e_basis: OrthonormalBasis
    h_basis: OrthonormalBasis
    w_sequence: np.ndarray
    unitary: np.ndarray
    complement_w: np.ndarray
    complement_adjoint: np.ndarray
    frame_bound: float
    max_residual: float
    unitarity_defect: float
    w_gram_defect: float
    tolerance: float
    adjoint_count: int = 0
    labels: list = field(default_factory=list)

    @property
    def ambient_dimension(self):
        return self.unitary.shape[0]

    @property
    def complement_dimension(self):
        return self.ambient_dimension - self.adjoint_count

    def to_json(self, hashes_only=False):
        from .serializers import RDualWitnessSerializer

        return RDualWitnessSerializer(self, context={'hashes_only': hashes_only}).data


def adjoint_rdual_witness(g, time_lattice, freq_lattice, e=None, h_tilde=None, tol=None,
                          ambient=None):
    """
    Build the unitary U with U w_{alpha beta} = E_beta T_alpha f for the
    Parseval rescaling f = g / sqrt(A), extended by U phi = psi on the
    complements, and check the R-dual identity for g against the
    transported basis {U h~_{lambda gamma}}.
    """
    tol = gablab_settings.DEFAULT_TOL if tol is None else tol
    sys = GaborSystem(g, time_lattice, freq_lattice)
    frame = frame_bounds(sys, Convention.PAPER, tol)
    if not (frame.is_frame and frame.is_tight):
        raise NotTightError(
            f"{sys!r} is not a tight frame (A={frame.lower:.6g}, B={frame.upper:.6g})."
        )
    e, h_tilde = _default_bases(sys, e, h_tilde, ambient)
    bound = 0.5 * (frame.lower + frame.upper)
    parseval = sys.with_window(g.scaled(1.0 / np.sqrt(bound)))
    k = h_tilde.dimension
    adjoint_count = sys.group.order ** 2 // sys.atom_count

    w = w_sequence(parseval, e, h_tilde)
    targets = embed(adjoint_atoms(parseval), k)
    phi = orthonormal_complement(w, k)
    psi = orthonormal_complement(targets, k)
    source = np.vstack([w, phi])
    image = np.vstack([targets, psi])
    unitary = image.T @ np.conj(source)
    transported = h_tilde.vectors @ unitary.T
    h_basis = OrthonormalBasis(transported, h_tilde.labels, tol=max(tol, 1e-10))

    weight = np.sqrt(float(sys.density))
    dual = rdual_sequence(weight * gabor_atoms(sys), e, h_basis.head(sys.atom_count))
    expected = embed(adjoint_atoms(sys), k)
    residual = float(np.max(np.linalg.norm(dual[:adjoint_count] - expected, axis=1)))
    unitarity = float(np.linalg.norm(unitary.conj().T @ unitary - np.eye(k)))
    w_defect = gram_defect(w)
    logger.debug(
        "R-dual witness for %r: K=%d residual=%.3e unitarity=%.3e", sys, k, residual, unitarity
    )
    if residual > tol * max(1.0, g.norm):
        raise ResidualExceededError(
            f"R-dual residual {residual:.3e} exceeds {tol:.1e} for {sys!r}."
        )
    return RDualWitness(
        e_basis=e,
        h_basis=h_basis,
        w_sequence=w,
        unitary=unitary,
        complement_w=phi,
        complement_adjoint=psi,
        frame_bound=bound,
        max_residual=residual,
        unitarity_defect=unitarity,
        w_gram_defect=w_defect,
        tolerance=tol,
        adjoint_count=adjoint_count,
        labels=sys.adjoint().labels,
    )


# ============================================
# SEARCH HARNESS FOR GENERAL FRAMES
# ============================================

@dataclass(eq=False)
class RDualProbe:
    frame: SpectralReport
    gram_mismatch: float
    unitary_exists: bool
    tolerance: float


def rdual_probe(g, time_lattice, freq_lattice, e=None, h_tilde=None, tol=None):
    """
    A unitary carrying every w_{alpha beta} to E_beta T_alpha g exists iff
    the two families have the same Gram matrix.
    """
    tol = gablab_settings.DEFAULT_TOL if tol is None else tol
    sys = GaborSystem(g, time_lattice, freq_lattice)
    e, h_tilde = _default_bases(sys, e, h_tilde, None)
    w_gram = gram(w_sequence(sys, e, h_tilde))
    adjoint_gram = gram(adjoint_atoms(sys))
    mismatch = float(np.max(np.abs(w_gram - adjoint_gram)))
    scale = max(1.0, float(np.max(np.abs(adjoint_gram))))
    return RDualProbe(
        frame=frame_bounds(sys, Convention.PAPER, tol),
        gram_mismatch=mismatch,
        unitary_exists=mismatch <= tol * scale,
        tolerance=tol,
    )


@dataclass(frozen=True)
class ProbeSearch:
    trials: int
    successes: int
    min_mismatch: float
    max_mismatch: float


def rdual_probe_search(g, time_lattice, freq_lattice, trials, seed, tol=None):
    """Probe `trials` pairs of seeded random bases; reports, asserts nothing."""
    sys = GaborSystem(g, time_lattice, freq_lattice)
    n, m = sys.group.order, sys.atom_count
    mismatches = []
    successes = 0
    for trial in range(trials):
        e = random_unitary_basis(n, seed + 2 * trial, _adjoint_labels(sys, n), sys.group)
        h_tilde = random_unitary_basis(m, seed + 2 * trial + 1, sys.labels)
        probe = rdual_probe(g, time_lattice, freq_lattice, e, h_tilde, tol)
        mismatches.append(probe.gram_mismatch)
        successes += int(probe.unitary_exists)
    logger.info("Probe search on %r: %d/%d unitaries exist", sys, successes, trials)
    return ProbeSearch(
        trials=trials,
        successes=successes,
        min_mismatch=min(mismatches, default=0.0),
        max_mismatch=max(mismatches, default=0.0),
    )
