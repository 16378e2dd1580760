import hashlib

import numpy as np
import pytest

from gablab.exceptions import (
    LatticeMismatchError,
    LengthMismatchError,
    NotOrthonormalError,
    NotParsevalError,
    NotTightError,
)
from gablab.gabor import GaborSystem, Window, delta_window, gabor_atoms, random_window
from gablab.group import Side, annihilator, enumerate_subgroups, make_group, span_subgroup
from gablab.rdual import (
    OrthonormalBasis,
    OrthonormalSystem,
    adjoint_rdual_witness,
    array_digest,
    ckl_duality_check,
    orthonormal_complement,
    parseval_w_orthonormality,
    random_unitary,
    random_unitary_basis,
    rdual_probe,
    rdual_probe_search,
    rdual_sequence,
    section_gabor_basis,
    standard_basis,
    verify_critical_rdual,
)
from gablab.spectral import canonical_parseval, frame_bounds
from . import oracles


def _parseval(group, seed, lam, gam):
    return canonical_parseval(GaborSystem(random_window(group, seed), lam, gam))


class TestOrthonormalFamilies:
    """Tests for orthonormal systems and bases."""

    def test_standard_basis(self):
        """Test the standard basis."""
        basis = standard_basis(3)
        assert basis.size == basis.dimension == 3
        assert basis.defect == 0.0

    def test_rejects_non_orthonormal(self):
        """Test that non-orthonormal rows are rejected."""
        with pytest.raises(NotOrthonormalError):
            OrthonormalSystem([[1, 0], [1, 1]])

    def test_basis_needs_full_size(self):
        """Test that a basis must span."""
        with pytest.raises(LengthMismatchError):
            OrthonormalBasis([[1, 0, 0], [0, 1, 0]])

    def test_labels_must_match(self):
        """Test one label per vector."""
        with pytest.raises(LengthMismatchError):
            OrthonormalSystem(np.eye(2), labels=['a'])

    def test_random_unitary(self):
        """Test unitarity and reproducibility of seeded unitaries."""
        u = random_unitary(6, 4)
        assert np.allclose(u.conj().T @ u, np.eye(6), atol=1e-12)
        assert np.array_equal(u, random_unitary(6, 4))

    def test_complement(self):
        """Test completion of one row to a basis."""
        row = np.array([[1, 1j, 0]]) / np.sqrt(2)
        complement = orthonormal_complement(row, 3)
        assert complement.shape == (2, 3)
        OrthonormalBasis(np.vstack([row, complement]))

    def test_empty_complement(self):
        """Test that a full basis has a zero-dimensional complement."""
        assert orthonormal_complement(np.eye(2), 2).shape == (0, 2)

    def test_digest_of_empty_array(self):
        """Test the digest of no data."""
        assert array_digest(np.zeros(0)) == hashlib.sha256(b'').hexdigest()

    def test_digest_is_layout_independent(self):
        """Test that a transposed view hashes like its contiguous copy."""
        a = np.arange(6, dtype=complex).reshape(2, 3).T
        assert array_digest(a) == array_digest(np.ascontiguousarray(a))
        assert array_digest(a) != array_digest(a * 2)


class TestRDualSequence:
    """Tests for abstract R-duals."""

    def test_basis_is_its_own_rdual(self):
        """Test that F = e and h = e give w = e."""
        e = random_unitary_basis(4, 1)
        assert np.allclose(rdual_sequence(e, e, e), e.vectors)

    def test_linearity(self, rng):
        """Test that scaling F scales w."""
        f = rng.standard_normal((5, 3))
        e, h = random_unitary_basis(3, 2), random_unitary_basis(5, 3)
        assert np.allclose(rdual_sequence(2.5 * f, e, h), 2.5 * rdual_sequence(f, e, h))

    def test_z2_direct_sum(self, z2_full):
        """Test the Z2 full system against the defining sum."""
        f = gabor_atoms(GaborSystem(*z2_full))
        e, h = standard_basis(2), standard_basis(4)
        w = rdual_sequence(f, e, h)
        expected = [
            sum(np.vdot(e.vectors[j], f[i]) * h.vectors[i] for i in range(4)) for j in range(2)
        ]
        assert np.allclose(w, expected)

    def test_accepts_windows(self, z4):
        """Test that a list of windows is a family."""
        family = [delta_window(z4, k) for k in range(4)]
        assert np.allclose(rdual_sequence(family, standard_basis(4), standard_basis(4)), np.eye(4))

    def test_dimension_mismatch(self):
        """Test that e must live where the family lives."""
        with pytest.raises(LengthMismatchError):
            rdual_sequence(np.eye(3), standard_basis(2), standard_basis(3))

    def test_h_count_mismatch(self):
        """Test one h per family member."""
        with pytest.raises(LengthMismatchError):
            rdual_sequence(np.eye(3), standard_basis(3), standard_basis(2))

    def test_e_must_be_orthonormal(self):
        """Test that a non-orthonormal e is rejected."""
        with pytest.raises(NotOrthonormalError):
            rdual_sequence(np.eye(2), [[1, 1], [0, 1]], standard_basis(2))


class TestCklDuality:
    """Tests for the abstract frame / Riesz duality of R-duals."""

    def test_orthonormal_basis(self):
        """Test an ONB against itself."""
        e = random_unitary_basis(3, 5)
        verdict = ckl_duality_check(e, e, e)
        assert verdict.holds
        assert np.allclose(verdict.column_sums, 1.0)
        assert (verdict.frame.lower, verdict.riesz.upper) == pytest.approx((1.0, 1.0))

    def test_basis_with_zero_vector(self):
        """Test that appending a zero vector keeps both sides at (1, 1)."""
        f = np.vstack([np.eye(2), np.zeros((1, 2))])
        verdict = ckl_duality_check(f, standard_basis(2), standard_basis(3))
        assert verdict.holds
        assert (verdict.riesz.lower, verdict.riesz.upper) == pytest.approx((1.0, 1.0))

    def test_incomplete_family(self):
        """Test that a non-spanning family fails on both sides."""
        verdict = ckl_duality_check([[1, 0]], standard_basis(2), standard_basis(1))
        assert verdict.holds
        assert not verdict.frame.is_frame
        assert not verdict.riesz.is_riesz_sequence

    def test_random_frame(self, rng):
        """Test a generic overcomplete family with random bases."""
        f = rng.standard_normal((7, 4)) + 1j * rng.standard_normal((7, 4))
        verdict = ckl_duality_check(f, random_unitary_basis(4, 6), random_unitary_basis(7, 7))
        assert verdict.holds and verdict.sums_within_bounds


class TestSectionGaborBasis:
    """Tests for the orthonormal basis built on a section."""

    def test_whole_group_gives_standard_basis(self, z4):
        """Test that Lambda = G gives shifted deltas."""
        basis = section_gabor_basis(enumerate_subgroups(z4)[-1])
        assert np.allclose(basis.vectors, np.eye(4))

    def test_trivial_lattice_gives_fourier_basis(self, z4):
        """Test that Lambda = {0} gives normalized characters."""
        basis = section_gabor_basis(enumerate_subgroups(z4)[0])
        x = np.arange(4)
        fourier = np.exp(2j * np.pi * np.outer(x, x) / 4) / 2
        assert np.allclose(basis.vectors, fourier)

    def test_half_lattice(self, z4_half):
        """Test the four vectors for Lambda = {0, 2} in Z4."""
        lam, _ = z4_half
        basis = section_gabor_basis(lam)
        assert basis.size == 4
        assert np.allclose(np.abs(basis.vectors[:2, 2:]), 0)
        assert basis.defect <= 1e-12

    @pytest.mark.slow
    @pytest.mark.parametrize('moduli', oracles.abelian_groups(64))
    def test_every_lattice(self, moduli):
        """Test orthonormality for every Lambda of every group up to order 64."""
        group = make_group(moduli)
        for lam in enumerate_subgroups(group):
            assert section_gabor_basis(lam).defect <= 1e-12


class TestCriticalRDual:
    """Tests for the R-dual identity on Lambda x Lambda^perp."""

    def test_zero_window(self, z12):
        """Test that f = 0 has zero residual."""
        result = verify_critical_rdual(Window(z12, np.zeros(12)), enumerate_subgroups(z12)[2])
        assert result.residual == 0.0
        assert result.holds

    def test_z2_trivial_lattice(self, z2):
        """Test the Fourier expansion case on Z2."""
        result = verify_critical_rdual(random_window(z2, 3), enumerate_subgroups(z2)[0])
        assert result.residual <= 1e-12

    def test_rejects_other_frequency_lattice(self, z4_half):
        """Test that Gamma must be the annihilator."""
        lam, _ = z4_half
        with pytest.raises(LatticeMismatchError):
            verify_critical_rdual(delta_window(lam.group), lam, enumerate_subgroups(lam.group, Side.DUAL)[0])

    @pytest.mark.parametrize('moduli', [(12,), (2, 4)])
    def test_random_windows(self, moduli):
        """Test 10 seeded windows on every lattice."""
        group = make_group(moduli)
        for seed in range(10):
            f = random_window(group, seed)
            for lam in enumerate_subgroups(group):
                result = verify_critical_rdual(f, lam, annihilator(lam))
                assert result.residual <= 1e-10 * max(1.0, f.norm)

    @pytest.mark.slow
    @pytest.mark.parametrize('moduli', [(12,), (2, 4), (16,), (2, 2, 2, 2)])
    def test_random_windows_sweep(self, moduli):
        """Test 100 seeded windows on every lattice."""
        group = make_group(moduli)
        for seed in range(100):
            f = random_window(group, seed)
            for lam in enumerate_subgroups(group):
                assert verify_critical_rdual(f, lam).residual <= 1e-10 * max(1.0, f.norm)


class TestParsevalW:
    """Tests for orthonormality of the w-sequence."""

    def test_z2_full(self, z2_full):
        """Test the single w of the worked Z2 case."""
        report = parseval_w_orthonormality(*z2_full)
        assert report.gram_defect <= 1e-12
        assert report.holds

    def test_random_bases(self, z12):
        """Test 20 random unitary choices of e and h~."""
        lam = span_subgroup(z12, Side.PRIMAL, [[3]])
        gam = span_subgroup(z12, Side.DUAL, [[2]])
        g = _parseval(z12, 1, lam, gam)
        for trial in range(20):
            e = random_unitary_basis(12, 100 + trial)
            h = random_unitary_basis(24, 200 + trial)
            assert parseval_w_orthonormality(g, lam, gam, e, h).gram_defect <= 1e-10

    def test_unnormalized_tight_frame(self, z2_full):
        """Test that A = 2 gives Gram(w) = 2I."""
        g, lam, gam = z2_full
        report = parseval_w_orthonormality(g.scaled(np.sqrt(2)), lam, gam, strict=False)
        assert not report.parseval
        assert report.gram_defect == pytest.approx(1.0)

    def test_strict_rejects_non_parseval(self, z2_full):
        """Test the Parseval precondition."""
        g, lam, gam = z2_full
        with pytest.raises(NotParsevalError):
            parseval_w_orthonormality(g.scaled(2), lam, gam)


class TestAdjointRDualWitness:
    """Tests for the R-dual witness of tight frames."""

    def test_z2_full(self, z2_full):
        """Test the worked Z2 case in the default ambient space C^M."""
        witness = adjoint_rdual_witness(*z2_full)
        assert witness.ambient_dimension == 4
        assert witness.adjoint_count == 1
        assert witness.complement_dimension == 3
        assert witness.complement_w.shape == witness.complement_adjoint.shape == (3, 4)
        assert witness.max_residual <= 1e-12
        assert witness.unitarity_defect <= 1e-12
        assert witness.frame_bound == pytest.approx(1.0)

    def test_larger_ambient_space(self, z2_full):
        """Test an ambient space above the atom count."""
        witness = adjoint_rdual_witness(*z2_full, ambient=6)
        assert witness.unitary.shape == (6, 6)
        assert witness.unitarity_defect <= 1e-12

    def test_ambient_below_atom_count(self, z2_full):
        """Test that K < M is rejected."""
        with pytest.raises(LengthMismatchError):
            adjoint_rdual_witness(*z2_full, ambient=3)

    def test_critically_sampled(self, z4_half):
        """Test that d = 1 leaves empty complements."""
        lam, _ = z4_half
        gam = span_subgroup(lam.group, Side.DUAL, [[2]])
        g = _parseval(lam.group, 4, lam, gam)
        witness = adjoint_rdual_witness(g, lam, gam)
        assert witness.complement_dimension == 0
        assert witness.complement_w.shape == (0, 4)
        assert witness.max_residual <= 1e-10

    def test_not_tight(self, z4_half):
        """Test that a generic window is rejected."""
        lam, _ = z4_half
        gam = enumerate_subgroups(lam.group, Side.DUAL)[-1]
        with pytest.raises(NotTightError):
            adjoint_rdual_witness(random_window(lam.group, 1), lam, gam)

    def test_to_json_hashes_only(self, z2_full):
        """Test that hashes replace matrices on request."""
        data = adjoint_rdual_witness(*z2_full).to_json(hashes_only=True)
        assert set(data['unitary']) == {'sha256', 'shape'}
        assert data['unitary']['shape'] == [4, 4]
        assert data['complementDimension'] == 3

    def test_to_json_full(self, z2_full):
        """Test the full matrix encoding as [re, im] pairs."""
        data = adjoint_rdual_witness(*z2_full).to_json()
        assert len(data['wSequence']) == 1
        assert len(data['wSequence'][0]) == 4
        assert data['eBasis']['labels'][0] == [0, 0]

    @pytest.mark.slow
    def test_z12_sweep(self, z12, lattice_pairs):
        """Test every Z12 lattice pair that admits a frame."""
        checked = 0
        for lam, gam in lattice_pairs(z12):
            sys = GaborSystem(random_window(z12, 0), lam, gam)
            if not frame_bounds(sys).is_frame:
                continue
            witness = adjoint_rdual_witness(canonical_parseval(sys), lam, gam)
            assert witness.unitarity_defect <= 1e-10
            assert witness.max_residual <= 1e-9
            assert witness.w_gram_defect <= 1e-10
            checked += 1
        assert checked > 0


class TestRDualProbe:
    """Tests for the general-frame probe."""

    def test_parseval_window(self, z2_full):
        """Test that a Parseval system admits the unitary."""
        assert rdual_probe(*z2_full).unitary_exists

    def test_generic_window(self, z4_half):
        """Test that Gram mismatches are reported for a non-tight frame."""
        lam, _ = z4_half
        gam = enumerate_subgroups(lam.group, Side.DUAL)[-1]
        probe = rdual_probe(random_window(lam.group, 1), lam, gam)
        assert not probe.unitary_exists
        assert probe.gram_mismatch > 0

    def test_search(self, z4_half):
        """Test the bookkeeping of a probe search."""
        lam, _ = z4_half
        gam = enumerate_subgroups(lam.group, Side.DUAL)[-1]
        g = _parseval(lam.group, 2, lam, gam)
        search = rdual_probe_search(g, lam, gam, trials=5, seed=9)
        assert search.trials == 5
        assert search.successes == 5
        assert search.max_mismatch <= 1e-10
