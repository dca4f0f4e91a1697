import math

import numpy as np
import pytest

from twqkd import (
    CovarianceMatrix,
    apply_symplectic,
    beam_splitter_symplectic,
    g_entropy,
    homodyne_condition,
    symplectic_eigenvalues,
    tmsv_covariance,
)
from twqkd.errors import DimensionMismatchError, UnphysicalEigenvalueError
from twqkd.gaussian import (
    SymplecticTransform,
    append_vacuum,
    entropy_sum,
    omega,
    permute_modes,
)

from conftest import random_physical_state, random_symplectic


class TestGEntropy:
    def test_pure_eigenvalue_is_zero(self):
        assert g_entropy(1.0) == 0.0

    def test_exact_value_at_three(self):
        # 2*log2(2) + 1*log2(1)
        assert g_entropy(3.0) == pytest.approx(2.0, abs=1e-15)

    def test_continuity_at_clamp_boundary(self):
        assert abs(g_entropy(1.0 + 1e-12)) < 1e-9

    def test_clamped_band_maps_to_zero(self):
        assert g_entropy(1.0 - 5e-10) == 0.0

    def test_unphysical_raises(self):
        with pytest.raises(UnphysicalEigenvalueError):
            g_entropy(1.0 - 1e-6)

    def test_strictly_increasing_on_grid(self):
        grid = np.concatenate([[1.001, 1.01, 1.1], np.arange(1.0, 100.1, 0.5)[1:]])
        values = [g_entropy(nu) for nu in sorted(grid)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_entropy_sum_matches_scalar(self):
        nus = [1.0, 2.5, 7.0]
        assert entropy_sum(nus) == pytest.approx(sum(g_entropy(n) for n in nus), abs=1e-14)


class TestSymplecticEigenvalues:
    def test_two_mode_vacuum(self):
        nus = symplectic_eigenvalues(CovarianceMatrix(np.eye(4)))
        assert np.allclose(nus, [1.0, 1.0])

    def test_tmsv_purity(self):
        nus = symplectic_eigenvalues(tmsv_covariance(40.0))
        assert np.allclose(nus, [1.0, 1.0], atol=1e-9)

    def test_single_mode_thermal(self):
        nus = symplectic_eigenvalues(CovarianceMatrix(np.diag([5.0, 5.0])))
        assert nus == pytest.approx([5.0])

    def test_descending_order(self, rng):
        for _ in range(20):
            nus = symplectic_eigenvalues(random_physical_state(4, rng))
            assert all(a >= b for a, b in zip(nus, nus[1:]))

    def test_non_symmetric_rejected(self):
        bad = np.eye(4)
        bad[0, 1] = 0.5
        with pytest.raises(ValueError):
            CovarianceMatrix(bad)


class TestApplySymplectic:
    def test_identity(self, rng):
        gamma = random_physical_state(3, rng)
        ident = SymplecticTransform(np.eye(6))
        assert np.allclose(apply_symplectic(gamma, ident).matrix, gamma.matrix)

    def test_vacuum_invariant_under_beam_splitter(self):
        vac = CovarianceMatrix(np.eye(4))
        bs = beam_splitter_symplectic(0.37, 0, 1, 2)
        assert np.allclose(apply_symplectic(vac, bs).matrix, np.eye(4), atol=1e-14)

    def test_tmsv_mode_swap(self):
        gamma = tmsv_covariance(7.0)
        swapped = permute_modes(gamma, [1, 0])
        assert np.allclose(swapped.matrix, gamma.matrix)  # symmetric under exchange

    def test_spectrum_preserved(self, rng):
        for _ in range(10):
            gamma = random_physical_state(3, rng)
            s = random_symplectic(3, rng)
            before = symplectic_eigenvalues(gamma)
            after = symplectic_eigenvalues(apply_symplectic(gamma, s))
            assert np.allclose(before, after, atol=1e-10 * max(1.0, before[0]))

    def test_purity_preserved(self, rng):
        for _ in range(10):
            gamma = random_physical_state(3, rng, pure=True)
            s = random_symplectic(3, rng)
            nus = symplectic_eigenvalues(apply_symplectic(gamma, s))
            assert np.allclose(nus, 1.0, atol=1e-9)

    def test_dimension_mismatch(self, rng):
        gamma = random_physical_state(2, rng)
        s = random_symplectic(3, rng)
        with pytest.raises(DimensionMismatchError):
            apply_symplectic(gamma, s)


class TestBeamSplitter:
    def test_full_transmission_is_identity(self):
        s = beam_splitter_symplectic(1.0, 0, 1, 2)
        assert np.allclose(s.matrix, np.eye(4))

    def test_zero_transmission_swaps_modes(self):
        s = beam_splitter_symplectic(0.0, 0, 1, 2).matrix
        # mode 0 reflects into mode 1 with a sign, mode 1 into mode 0
        expected = np.zeros((4, 4))
        expected[0, 2] = expected[1, 3] = 1.0
        expected[2, 0] = expected[3, 1] = -1.0
        assert np.allclose(s, expected)

    def test_balanced_mix_of_tmsv_and_vacuum(self):
        v = 11.0
        gamma = append_vacuum(tmsv_covariance(v))
        bs = beam_splitter_symplectic(0.5, 1, 2, 3)
        out = apply_symplectic(gamma, bs)
        assert out.mode_block(1)[0, 0] == pytest.approx((v + 1.0) / 2.0, rel=1e-12)

    def test_symplectic_invariant(self, rng):
        omg = omega(3)
        for _ in range(25):
            t = rng.uniform(0.0, 1.0)
            a, b = rng.choice(3, size=2, replace=False)
            s = beam_splitter_symplectic(float(t), int(a), int(b), 3).matrix
            assert np.abs(s @ omg @ s.T - omg).max() < 1e-10

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            beam_splitter_symplectic(1.5, 0, 1, 2)
        with pytest.raises(ValueError):
            beam_splitter_symplectic(0.5, 0, 0, 2)
        with pytest.raises(ValueError):
            beam_splitter_symplectic(0.5, 0, 5, 2)


class TestTmsvCovariance:
    def test_vacuum_limit(self):
        assert np.allclose(tmsv_covariance(1.0).matrix, np.eye(4))

    def test_off_diagonal_value(self):
        gamma = tmsv_covariance(40.0)
        assert gamma.matrix[0, 2] == pytest.approx(math.sqrt(1599.0), rel=1e-15)
        assert gamma.matrix[1, 3] == pytest.approx(-math.sqrt(1599.0), rel=1e-15)

    @pytest.mark.parametrize("v", [1.0, 1.5, 5.0, 40.0, 300.0])
    def test_purity(self, v):
        nus = symplectic_eigenvalues(tmsv_covariance(v))
        assert np.allclose(nus, 1.0, atol=1e-9)

    def test_below_vacuum_rejected(self):
        with pytest.raises(ValueError):
            tmsv_covariance(0.9)


class TestHomodyneCondition:
    def test_product_state_unchanged(self):
        gamma = CovarianceMatrix(np.diag([1.0, 1.0, 5.0, 5.0]))
        out = homodyne_condition(gamma, measured_mode=1, quadrature="x")
        assert np.allclose(out.matrix, np.eye(2))

    def test_tmsv_schur_complement(self):
        v = 13.0
        out = homodyne_condition(tmsv_covariance(v), measured_mode=1, quadrature="x")
        assert np.allclose(out.matrix, np.diag([1.0 / v, v]), rtol=1e-12)

    def test_tmsv_p_measurement(self):
        v = 13.0
        out = homodyne_condition(tmsv_covariance(v), measured_mode=1, quadrature="p")
        assert np.allclose(out.matrix, np.diag([v, 1.0 / v]), rtol=1e-12)

    def test_zero_variance_uses_pseudoinverse(self):
        gamma = CovarianceMatrix(np.diag([2.0, 3.0, 0.0, 5.0]))
        out = homodyne_condition(gamma, measured_mode=1, quadrature="x")
        assert np.allclose(out.matrix, np.diag([2.0, 3.0]))

    def test_invalid_mode(self):
        with pytest.raises(ValueError):
            homodyne_condition(tmsv_covariance(2.0), measured_mode=5)

    def test_conditioning_never_increases_entropy(self, rng):
        # entropy of the unmeasured modes: marginal vs conditional
        for _ in range(25):
            gamma = random_physical_state(3, rng)
            marginal = CovarianceMatrix(gamma.matrix[2:, 2:])
            cond = homodyne_condition(gamma, 0, "x")
            s_before = entropy_sum(symplectic_eigenvalues(marginal))
            s_after = entropy_sum(np.maximum(symplectic_eigenvalues(cond), 1.0))
            assert s_after <= s_before + 1e-9

    def test_commutes_with_relabeling(self, rng):
        perm = [2, 0, 1]  # permutation of the three unmeasured modes
        for _ in range(10):
            gamma = random_physical_state(4, rng)
            permute_then_condition = homodyne_condition(
                permute_modes(gamma, perm + [3]), 3, "x"
            )
            condition_then_permute = permute_modes(
                homodyne_condition(gamma, 3, "x"), perm
            )
            assert np.allclose(
                permute_then_condition.matrix, condition_then_permute.matrix, atol=1e-11
            )


class TestSymplecticTransformType:
    def test_rejects_non_symplectic(self):
        with pytest.raises(ValueError):
            SymplecticTransform(2.0 * np.eye(4))

    def test_accepts_squeezer(self):
        s = np.diag([2.0, 0.5, 1.0, 1.0])
        assert SymplecticTransform(s).n_modes == 2
