import numpy as np
import pytest

from nbx.exceptions import NotQuasiConcaveError
from nbx.indices import (QuasiConcaveSample, almost_increasing_gamma,
                         estimate_indices, scan_indices)

GRID = np.logspace(-4, 0, 256)


class TestPowerRecovery:
    @pytest.mark.parametrize("theta", [0.1, 0.5, 0.9])
    def test_exact_powers(self, theta):
        sample = QuasiConcaveSample(GRID, GRID ** theta)
        alpha0, beta0 = estimate_indices(sample, gamma_cap=1.0)
        assert abs(alpha0 - theta) <= 0.01
        assert abs(beta0 - theta) <= 0.01

    def test_identity(self):
        sample = QuasiConcaveSample(GRID, GRID.copy())
        alpha0, beta0 = estimate_indices(sample, gamma_cap=1.0)
        assert abs(alpha0 - 1.0) <= 0.01 and abs(beta0 - 1.0) <= 0.01


class TestLogCorrection:
    def test_indices_split(self):
        sample = QuasiConcaveSample(GRID, GRID * (1.0 + np.abs(np.log(GRID))))
        alpha0, beta0 = estimate_indices(sample, gamma_cap=1.0)
        assert alpha0 < 1.0
        assert beta0 > alpha0
        a2, b2 = scan_indices(sample, gamma_cap=1.0)
        assert abs(alpha0 - a2) <= 0.02
        assert abs(beta0 - b2) <= 0.02


class TestInvariants:
    def test_order(self):
        rng = np.random.default_rng(1)
        # random concave-in-logs sample: cumulative max of slopes <= 1
        y = np.minimum.accumulate(rng.uniform(0.2, 1.0, len(GRID)))
        phi = np.exp(np.cumsum(np.concatenate([[0.0], y[1:] * np.diff(np.log(GRID))])))
        phi *= GRID[0] ** 0.5 / phi[0]
        sample = QuasiConcaveSample(GRID, phi)
        a, b = estimate_indices(sample, gamma_cap=2.0)
        assert 0.0 <= a <= b <= 1.0

    def test_scaling_invariance(self):
        s1 = QuasiConcaveSample(GRID, GRID ** 0.5)
        s2 = QuasiConcaveSample(GRID, 37.0 * GRID ** 0.5)
        assert estimate_indices(s1, 1.0) == pytest.approx(
            estimate_indices(s2, 1.0), abs=1e-12)

    def test_positive_alpha_gives_almost_increasing(self):
        sample = QuasiConcaveSample(GRID, GRID ** 0.6)
        alpha0, _ = estimate_indices(sample, gamma_cap=1.0)
        assert alpha0 > 0.0
        gamma = almost_increasing_gamma(sample, alpha0 / 2.0)
        assert gamma <= 1.0 + 1e-12

    def test_gamma_cap_sensitivity(self):
        sample = QuasiConcaveSample(GRID, GRID * (1.0 + np.abs(np.log(GRID))))
        a1, b1 = estimate_indices(sample, gamma_cap=1.0)
        a2, b2 = estimate_indices(sample, gamma_cap=1.5)
        # extra slack moves the admissible exponents inward from both sides
        assert a2 >= a1 - 1e-12
        assert b2 <= b1 + 1e-12
        # a huge cap degenerates the finite-grid estimate but stays ordered
        a3, b3 = estimate_indices(sample, gamma_cap=1e3)
        assert 0.0 <= a3 <= b3 <= 1.0


class TestValidation:
    def test_rejects_non_quasi_concave(self):
        with pytest.raises(NotQuasiConcaveError):
            QuasiConcaveSample(GRID, GRID ** 2)  # phi/s increasing
        with pytest.raises(NotQuasiConcaveError):
            QuasiConcaveSample(GRID, 1.0 - 0.5 * GRID)  # decreasing

    def test_grid_requirements(self):
        with pytest.raises(ValueError):
            QuasiConcaveSample(np.array([0.5, 0.4]), np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            estimate_indices(QuasiConcaveSample(GRID[:32], GRID[:32]), 1.0)
        with pytest.raises(ValueError):
            estimate_indices(QuasiConcaveSample(GRID, GRID.copy()), 0.5)


class TestProfileBridge:
    def test_from_profile_csv(self, tmp_path):
        from nbx.basis import DilationBasis, residual_function
        from nbx.rearrangement import rearrange

        # a nearly flat residual: the running integral is phi(s) ~ s
        f = residual_function(DilationBasis.integer(1), [1e-3], 1e-2)
        prof = rearrange(f, 4096)
        path = tmp_path / "profile.csv"
        prof.to_csv(path)
        sample = QuasiConcaveSample.from_profile_csv(path)
        alpha0, beta0 = estimate_indices(sample, gamma_cap=1.0)
        assert abs(alpha0 - 1.0) <= 0.01 and abs(beta0 - 1.0) <= 0.01

    def test_residual_profile_indices_in_range(self, tmp_path, corpus):
        _, _, _, prof = corpus[0]
        path = tmp_path / "res_profile.csv"
        prof.to_csv(path)
        sample = QuasiConcaveSample.from_profile_csv(path)
        a, b = estimate_indices(sample, gamma_cap=10.0)
        assert 0.0 <= a <= b <= 1.0
