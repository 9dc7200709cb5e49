import numpy as np
import pytest

from nbx.basis import DilationBasis, residual_function
from nbx.piecewise import PiecewiseFunction
from nbx.rearrangement import double_star, k_l1_linf, rearrange

from oracles import stratified_samples


class TestChiProfile:
    def test_flat_profile(self, chi_profile):
        assert chi_profile.l1_mass == pytest.approx(1.0)
        assert chi_profile.fstar_at(0.5) == 1.0
        assert chi_profile.fstar_at(1.5) == 0.0

    def test_double_star(self, chi_profile):
        assert double_star(chi_profile, 0.5) == pytest.approx(1.0)
        assert double_star(chi_profile, 4.0) == pytest.approx(0.25)

    def test_running_integral(self, chi_profile):
        assert k_l1_linf(chi_profile, 0.3) == pytest.approx(0.3)
        assert k_l1_linf(chi_profile, 7.0) == pytest.approx(1.0)
        assert k_l1_linf(chi_profile, 1e-9) <= 1e-8


class TestStepProfile:
    def test_levels(self, step_profile):
        assert step_profile.fstar_at(0.25) == 2.0
        assert step_profile.fstar_at(0.75) == 0.0
        assert step_profile.l1_mass == pytest.approx(1.0)

    def test_unit_average(self, step_profile):
        assert double_star(step_profile, 1.0) == pytest.approx(1.0)


class TestResidualProfile:
    def test_monte_carlo_cum(self):
        f = residual_function(DilationBasis.integer(1), [1.0], 1e-3)
        prof = rearrange(f, 2 ** 16)
        rng = np.random.default_rng(0)
        x = stratified_samples(10 ** 6, rng)
        x = x[x > 1e-3]
        vals = np.sort(np.abs(f(x)))[::-1]
        cum_mc = np.cumsum(vals) / 10 ** 6
        s = (np.arange(len(vals)) + 1.0) / 10 ** 6
        sup_diff = float(np.max(np.abs(cum_mc - prof.cum_at(s))))
        assert sup_diff <= 1e-4

    def test_invariants_on_corpus(self, corpus):
        for _, _, f, prof in corpus:
            # mass and energy agree with direct segment integration
            assert prof.l1_mass == pytest.approx(f.l1_norm(), abs=1e-8)
            assert prof.l2_sq == pytest.approx(f.l2_norm_sq(), abs=1e-8)
            # profile is genuinely decreasing with dominated averages
            assert np.all(np.diff(prof.fstar) <= 1e-12)
            fss = prof.cum / prof.s_hi
            assert np.all(fss >= prof.fstar - 1e-12)
            # step-shape error certificate
            assert prof.variance_gap < 1e-6

    def test_concavity_uniform_grid(self, corpus):
        _, _, _, prof = corpus[0]
        s = np.linspace(1e-3, 1.0, 4096)
        second = np.diff(prof.cum_at(s), 2)
        assert np.max(second) <= 1e-10

    def test_exact_rule_beyond_unit_mass(self, corpus):
        _, _, _, prof = corpus[0]
        for s in (1.0, 2.5, 40.0):
            assert prof.k_l1_linf(s) == pytest.approx(prof.l1_mass, rel=1e-12)
            assert prof.double_star(s) == pytest.approx(prof.l1_mass / s,
                                                        rel=1e-12)


class TestConvergenceAndValidation:
    def test_grid_size_floor(self):
        with pytest.raises(ValueError):
            rearrange(PiecewiseFunction.chi(), 8)

    def test_doubling_certificate(self):
        f = residual_function(DilationBasis.integer(2), [1.0, -1.0], 1e-3)
        a = rearrange(f, 1024)
        b = rearrange(f, 2048)
        assert abs(a.l1_mass - b.l1_mass) < 1e-8

    def test_positive_s_required(self, chi_profile):
        with pytest.raises(ValueError):
            chi_profile.double_star(0.0)
        with pytest.raises(ValueError):
            chi_profile.k_l1_linf(-1.0)


class TestProfileDump:
    def test_csv_columns(self, tmp_path, corpus):
        _, _, _, prof = corpus[0]
        path = tmp_path / "profile.csv"
        prof.to_csv(path, max_rows=100)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "s,fstar,fstarstar"
        s, fstar, fss = map(float, lines[1].split(","))
        assert fss >= fstar >= 0.0 and 0.0 < s <= 1.0


class TestScaling:
    def test_profile_scaling(self, corpus):
        _, _, _, prof = corpus[1]
        sc = prof.scaled(-3.0)
        assert sc.l1_mass == pytest.approx(3.0 * prof.l1_mass)
        assert sc.l2_sq == pytest.approx(9.0 * prof.l2_sq)
        assert sc.w_tail(0.01) == pytest.approx(9.0 * prof.w_tail(0.01))
