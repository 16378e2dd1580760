from fractions import Fraction

import numpy as np
import pytest

from gablab.exceptions import InvalidThetaError, LengthMismatchError, SideMismatchError
from gablab.gabor import GaborSystem, Window, delta_window, frame_operator, random_window
from gablab.group import Side, enumerate_subgroups, make_group, span_subgroup
from gablab.density import (
    Resolvent,
    adjoint_lattice_size,
    completeness_sweep,
    completeness_verdict,
    covering,
    lattice_size,
    psi,
    psi_identity_defect,
    regularized_vector,
    validate_theta_grid,
)
from .factories import WindowFactory


def _trivial_pair(group):
    return enumerate_subgroups(group, Side.PRIMAL)[0], enumerate_subgroups(group, Side.DUAL)[0]


class TestLatticeSize:
    """Tests for d(Lambda x Gamma)."""

    def test_critical(self):
        """Test Lambda = <2>, Gamma = <3> in Z6."""
        group = make_group([6])
        lam = span_subgroup(group, Side.PRIMAL, [[2]])
        gam = span_subgroup(group, Side.DUAL, [[3]])
        assert lattice_size(lam, gam).value == 1

    def test_z2_full(self, z2_full):
        """Test d = 1/2 for the full Z2 lattice."""
        _, lam, gam = z2_full
        size = lattice_size(lam, gam)
        assert size.value == Fraction(1, 2)
        assert str(size) == '1/2'
        assert float(size) == 0.5

    @pytest.mark.parametrize('moduli', [(12,), (2, 4), (2, 2, 2)])
    def test_reciprocity(self, moduli, lattice_pairs):
        """Test d(Gamma^perp x Lambda^perp) = 1 / d(Lambda x Gamma) for every pair."""
        for lam, gam in lattice_pairs(make_group(moduli)):
            assert adjoint_lattice_size(lam, gam).value == lattice_size(lam, gam).inverse

    def test_agrees_with_system_density(self, z12, lattice_pairs):
        """Test the section measure product against N / (|Lambda| |Gamma|)."""
        g = delta_window(z12)
        for lam, gam in lattice_pairs(z12):
            assert lattice_size(lam, gam).value == GaborSystem(g, lam, gam).density

    def test_side_mismatch(self, z4_half):
        """Test that the lattices must come in (G, G^) order."""
        lam, perp = z4_half
        with pytest.raises(SideMismatchError):
            lattice_size(perp, lam)


class TestCovering:
    """Tests for the covering cells E_i."""

    def test_half_lattices(self, z4_half):
        """Test Lambda = Gamma = {0, 2} in Z4: a single cell {0, 1}."""
        lam, perp = z4_half
        cov = covering(lam, perp)
        assert cov.size == 1
        assert list(cov.cells[0]) == [0, 1]
        assert cov.alphas[0].is_zero()

    def test_whole_group(self, z4):
        """Test Lambda = G: the single cell {0}."""
        whole = enumerate_subgroups(z4)[-1]
        cov = covering(whole, enumerate_subgroups(z4, Side.DUAL)[1])
        assert [list(cell) for cell in cov.cells] == [[0]]

    @pytest.mark.parametrize('moduli', [(12,), (2, 4)])
    def test_cells_partition_section(self, moduli, lattice_pairs):
        """Test that the cells partition S_Lambda for every pair."""
        for lam, gam in lattice_pairs(make_group(moduli)):
            cov = covering(lam, gam)
            covered = np.sort(np.concatenate(cov.cells))
            assert list(covered) == sorted(cov.section_indices)


class TestPsi:
    """Tests for the functional psi."""

    @pytest.fixture
    def cov(self, z12):
        """Fixture for a covering of Z12 with several cells."""
        return covering(
            span_subgroup(z12, Side.PRIMAL, [[6]]), span_subgroup(z12, Side.DUAL, [[3]])
        )

    def test_covering_has_two_cells(self, cov):
        """Test the cells {0, 1, 2, 3} and {4, 5}."""
        assert [list(cell) for cell in cov.cells] == [[0, 1, 2, 3], [4, 5]]

    def test_identity(self, cov):
        """Test psi(I) = 1."""
        assert psi(np.eye(12), cov) == pytest.approx(1.0)

    def test_zero(self, cov):
        """Test psi(0) = 0."""
        assert psi(np.zeros((12, 12)), cov) == 0

    def test_scalar(self, cov):
        """Test psi(cI) = c."""
        assert psi((2 - 1j) * np.eye(12), cov) == pytest.approx(2 - 1j)

    def test_size_mismatch(self, cov):
        """Test rejection of a wrongly sized operator."""
        with pytest.raises(LengthMismatchError):
            psi(np.eye(4), cov)

    @pytest.mark.parametrize('moduli', [(6,), (2, 4)])
    def test_cross_frame_identity(self, moduli, lattice_pairs):
        """Test psi(T*_f T_h) = (1/d) <f, h> for every pair."""
        group = make_group(moduli)
        f, h = random_window(group, 1), random_window(group, 2)
        for lam, gam in lattice_pairs(group):
            assert psi_identity_defect(f, h, lam, gam) <= 1e-10


class TestRegularizedVector:
    """Tests for h_theta = (theta I + S)^-1 f."""

    def test_z2_closed_form(self, z2_full):
        """Test h_1 = delta_0 / 3 when S = 2I."""
        g, lam, gam = z2_full
        h = regularized_vector(g, lam, gam, g, 1.0)
        assert np.allclose(h.values, [1 / 3, 0])

    def test_matches_linear_solve(self, z4_half):
        """Test against a direct linear solve."""
        lam, perp = z4_half
        g = WindowFactory(group=lam.group)
        f = WindowFactory(group=lam.group)
        s = frame_operator(GaborSystem(g, lam, perp))
        expected = np.linalg.solve(0.3 * np.eye(4) + s, f.values)
        assert np.allclose(regularized_vector(g, lam, perp, f, 0.3).values, expected)

    def test_small_eigenvalue_is_kept(self, z4):
        """Test an exact solve when S has an eigenvalue below the rank cutoff."""
        g = Window(z4, [1.0, 1.0, 1e-6, 1.0])
        lam = enumerate_subgroups(z4, Side.PRIMAL)[0]
        gam = enumerate_subgroups(z4, Side.DUAL)[-1]
        # S = 4 diag(|g|^2), so the third eigenvalue is 4e-12
        h = regularized_vector(g, lam, gam, delta_window(z4, 2), 1e-12)
        assert h.values[2] == pytest.approx(1 / (1e-12 + 4e-12), rel=1e-6)
        _, rank = Resolvent(GaborSystem(g, lam, gam)).projection()
        assert rank == 3

    def test_large_theta(self, z2_full):
        """Test that theta h_theta tends to f as theta grows."""
        g, lam, gam = z2_full
        f = Window(g.group, [0.5, -2j])
        h = regularized_vector(g, lam, gam, f, 1e6)
        assert np.linalg.norm(1e6 * h.values - f.values) < 1e-5

    def test_tight_frame_is_scalar(self, z2_full):
        """Test h_theta = f / (theta + A) when S = A I."""
        g, lam, gam = z2_full
        f = Window(g.group, [1j, 3])
        h = regularized_vector(g, lam, gam, f, 0.5)
        assert np.allclose(h.values, f.values / 2.5)

    @pytest.mark.parametrize('theta', [0, -1.0])
    def test_theta_must_be_positive(self, z2_full, theta):
        """Test rejection of non-positive theta."""
        g, lam, gam = z2_full
        with pytest.raises(InvalidThetaError):
            regularized_vector(g, lam, gam, g, theta)


class TestThetaGrid:
    """Tests for theta grid validation."""

    def test_valid(self):
        """Test a strictly descending positive grid."""
        assert validate_theta_grid([1, 0.5, 1e-3]) == [1.0, 0.5, 1e-3]

    @pytest.mark.parametrize('grid', [[], [1, 0], [0.1, 1], [1, 1]])
    def test_invalid(self, grid):
        """Test empty, non-positive and non-descending grids."""
        with pytest.raises(InvalidThetaError):
            validate_theta_grid(grid)

    def test_default_grid_from_settings(self, settings, z2_full):
        """Test that the sweep falls back to the configured grid."""
        settings.GABLAB = {'THETA_GRID': [2.0, 1.0]}
        assert completeness_sweep(*z2_full).thetas == [2.0, 1.0]


class TestCompletenessSweep:
    """Tests for the psi sweep toward theta = 0."""

    def test_z2_worked_case(self, z2_full):
        """Test <g, h_1> = 1/3 and psi = 2/3 at theta = 1."""
        sweep = completeness_sweep(*z2_full, theta_grid=[1.0])
        assert sweep.inner_products[0] == pytest.approx(1 / 3)
        assert sweep.psi_values[0] == pytest.approx(2 / 3)
        assert sweep.d_inverse == 2
        assert sweep.identity_defects[0] <= 1e-9

    def test_z2_limit(self, z2_full):
        """Test psi -> psi(I) = 1 for a complete system."""
        sweep = completeness_sweep(*z2_full, theta_grid=[1e-2, 1e-4, 1e-8])
        assert sweep.complete
        assert sweep.psi_limit == pytest.approx(1.0)
        assert sweep.psi_values[-1] == pytest.approx(1.0, abs=1e-7)
        assert sweep.psi_values == sorted(sweep.psi_values)

    def test_incomplete_system(self, z4):
        """Test that an incomplete system keeps psi below 1."""
        lam, gam = _trivial_pair(z4)
        g = random_window(z4, 3)
        sweep = completeness_sweep(g, lam, gam)
        assert not sweep.complete
        assert sweep.psi_limit < 1
        assert sweep.psi_values[-1] < 1
        # P is the rank-one projection onto g
        projection = np.outer(g.values, g.values.conj()) / g.energy
        assert sweep.psi_limit == pytest.approx(psi(projection, covering(lam, gam)).real)

    @pytest.mark.parametrize('moduli', [(6,), (2, 4)])
    def test_identities_hold_on_every_pair(self, moduli, lattice_pairs):
        """Test the psi identity and the energy decomposition along the default grid."""
        group = make_group(moduli)
        g = random_window(group, 4)
        for lam, gam in lattice_pairs(group):
            sweep = completeness_sweep(g, lam, gam)
            assert sweep.max_identity_defect <= 1e-9
            assert max(sweep.decomposition_defects) <= 1e-9
            assert sweep.bounded

    @pytest.mark.parametrize('moduli', [(6,), (8,)])
    def test_limit_on_every_pair(self, moduli, lattice_pairs):
        """Test psi at theta = 1e-6 against psi(P) over five windows."""
        group = make_group(moduli)
        for seed in range(5):
            g = random_window(group, seed)
            for lam, gam in lattice_pairs(group):
                sweep = completeness_sweep(g, lam, gam)
                assert sweep.thetas[-1] == 1e-6
                assert sweep.psi_values == sorted(sweep.psi_values)
                assert sweep.limit_gap >= -1e-8
                assert sweep.limit_gap <= sweep.limit_bound + 1e-9
                assert sweep.reaches_limit
                if sweep.limit_bound <= 1e-6:
                    assert abs(sweep.limit_gap) <= 1e-6

    def test_limit_bound_z2(self, z2_full):
        """Test the ceiling theta / (theta + 2) for S = 2I."""
        sweep = completeness_sweep(*z2_full, theta_grid=[1.0, 1e-6])
        assert sweep.smallest_positive == pytest.approx(2.0)
        assert sweep.limit_bound == pytest.approx(1e-6 / (1e-6 + 2.0))
        assert sweep.limit_gap == pytest.approx(sweep.limit_bound, rel=1e-6)

    def test_rows(self, z2_full):
        """Test the CSV row layout."""
        rows = completeness_sweep(*z2_full, theta_grid=[1.0]).rows()
        theta, inner, value, bound, defect = rows[0]
        assert (theta, bound) == (1.0, 2.0)
        assert value == pytest.approx(2 / 3)


class TestCompletenessVerdict:
    """Tests for the completeness / density verdict."""

    def test_undersampled(self, z4_half):
        """Test d = 2 with two atoms in C^4."""
        lam, _ = z4_half
        gam = enumerate_subgroups(lam.group, Side.DUAL)[0]
        verdict = completeness_verdict(WindowFactory(group=lam.group), lam, gam)
        assert verdict.lattice_size == 2
        assert verdict.atom_count == 2
        assert not verdict.complete
        assert verdict.holds and verdict.counting_witness

    def test_z2_full(self, z2_full):
        """Test that the complete Z2 system has d = 1/2."""
        verdict = completeness_verdict(*z2_full)
        assert verdict.complete
        assert verdict.rank == 2
        assert verdict.lattice_size == Fraction(1, 2)
        assert verdict.holds

    def test_resolvent_projection_rank(self, z4):
        """Test the rank of the span projection for a single atom."""
        sys = GaborSystem(random_window(z4, 6), *_trivial_pair(z4))
        projection, rank = Resolvent(sys).projection()
        assert rank == 1
        assert np.allclose(projection @ projection, projection)

    @pytest.mark.slow
    def test_z8_sweep(self, lattice_pairs):
        """Test every Z8 lattice pair with five random windows."""
        group = make_group([8])
        for seed in range(5):
            g = random_window(group, seed)
            for lam, gam in lattice_pairs(group):
                verdict = completeness_verdict(g, lam, gam)
                assert verdict.holds
                if verdict.complete:
                    assert verdict.lattice_size <= 1
