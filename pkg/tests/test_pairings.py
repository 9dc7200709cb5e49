import math

import numpy as np
import pytest

from nbx.basis import CHI, LOG_GENERATOR, DilationBasis
from nbx.exceptions import ToleranceNotReachedError
from nbx.pairings import (gram_matrix, inner_product, inner_product_with_bound,
                          residual_tail_moments)

from oracles import (quad_pairing, segment_series_diag,
                     stratified_samples, telescoping_one_minus_gamma)


def test_chi_chi_is_one():
    assert inner_product(CHI, CHI) == 1.0


def test_chi_rho1_matches_telescoping_oracle():
    ref, half = telescoping_one_minus_gamma()
    assert half < 1e-12
    v = inner_product(CHI, 1.0, 1e-12)
    assert abs(v - ref) < 1e-12 + half
    # the telescoping series collapses to 1 - euler_gamma
    assert abs(v - (1.0 - np.euler_gamma)) < 1e-12


def test_diagonal_matches_segment_series_oracle():
    ref, half = segment_series_diag()
    assert half < 1e-12
    v = inner_product(1.0, 1.0, 1e-12)
    assert abs(v - ref) < 1e-12 + half


def test_diagonal_matches_monte_carlo():
    rng = np.random.default_rng(42)
    x = stratified_samples(10 ** 6, rng)
    t = 1.0 / x
    mc = float(np.mean((t - np.floor(t)) ** 2))
    assert abs(inner_product(1.0, 1.0, 1e-12) - mc) < 1e-4


def test_symmetry():
    for a, b in [(1.0, 2.0), (3.0, 7.0), (1.5, 2.5)]:
        tol = 1e-11
        assert abs(inner_product(a, b, tol) - inner_product(b, a, tol)) <= 2 * tol


def test_generator_accepted_on_either_side():
    assert inner_product(CHI, 2.0, 1e-10) == inner_product(2.0, CHI, 1e-10)
    assert inner_product(None, 2.0, 1e-10) == inner_product(2.0, None, 1e-10)


def test_certified_bound_respected():
    v, bound = inner_product_with_bound(2.0, 5.0, 1e-9)
    assert bound <= 1e-9
    ref, _ = inner_product_with_bound(2.0, 5.0, 1e-13)
    assert abs(v - ref) <= bound + 1e-13


def test_gram_positive_semidefinite():
    gd = gram_matrix(DilationBasis.integer(64), tol=1e-9)
    eig = np.linalg.eigvalsh(gd.matrix)
    assert eig[0] >= -64 * 1e-9


def test_adaptive_quadrature_oracle_random_pairs():
    rng = np.random.default_rng(2718)
    pool = [float(k) for k in range(1, 33)] + [1.5, 2.5, 3.5, 4.25, 6.5, 10.5]
    worst = 0.0
    for _ in range(20):
        a, b = sorted(rng.choice(pool, size=2))
        oracle, obound = quad_pairing(a, b, target=1e-8)
        v = inner_product(a, b, 1e-10)
        worst = max(worst, abs(v - oracle))
        assert abs(v - oracle) <= obound + 1e-10
    assert worst < 1e-8


def test_domain_validation():
    with pytest.raises(ValueError):
        inner_product(0.5, 1.0)
    with pytest.raises(ValueError):
        inner_product(1.0, 2.0, tol=-1e-9)


def test_tolerance_not_reached_for_wild_ratio():
    # float pi / 1 has an astronomically large reduced ratio, so only the
    # crude tail bound is available and tight tolerances must be refused
    with pytest.raises(ToleranceNotReachedError):
        inner_product(1.0, math.pi, 1e-9, max_segments=10 ** 6)


def test_wild_ratio_coarse_tolerance_ok():
    v = inner_product(1.0, math.pi, 2e-5)
    oracle, obound = quad_pairing(1.0, 3.140625, target=1e-8)  # nearby rational
    # values at nearby dilations differ by O(da); just sanity-check the range
    assert 0.0 < v < 1.0
    assert abs(v - oracle) < 5e-3


def test_residual_tail_moments_small_cut():
    basis = DilationBasis.integer(3)
    coeffs = np.array([1.0, -0.5, 0.25])
    eps = 1e-4
    m1, m2, bound = residual_tail_moments(basis, coeffs, eps)
    # brute stratified check of both moments on (0, eps)
    rng = np.random.default_rng(5)
    x = stratified_samples(400_000, rng) * eps
    f = 1.0 - sum(c * ((1.0 / (a * x)) - np.floor(1.0 / (a * x)))
                  for a, c in zip(basis.dilations, coeffs))
    ref1 = float(np.mean(f)) * eps
    ref2 = float(np.mean(f * f)) * eps
    assert abs(m1 - ref1) < 5e-8
    assert abs(m2 - ref2) < 5e-7
    assert bound < 1e-6


def test_gram_data_shape_and_chi_vector():
    gd = gram_matrix(DilationBasis.integer(3), tol=1e-10)
    assert gd.n == 3
    np.testing.assert_allclose(gd.matrix, gd.matrix.T)
    assert gd.chi_vector[0] == pytest.approx(1.0 - np.euler_gamma, abs=1e-10)


class TestLogGenerator:
    def test_closed_combinations(self):
        assert inner_product(LOG_GENERATOR, LOG_GENERATOR) == 2.0
        assert inner_product(LOG_GENERATOR, CHI) == -1.0
        assert inner_product(CHI, LOG_GENERATOR) == -1.0

    def test_numeric_pairing_vs_monte_carlo(self):
        v, bound = inner_product_with_bound(LOG_GENERATOR, 1.0, 1e-8)
        assert bound <= 1e-8
        rng = np.random.default_rng(9)
        x = stratified_samples(2_000_000, rng)
        t = 1.0 / x
        mc = float(np.mean(np.log(x) * (t - np.floor(t))))
        assert abs(v - mc) < 5e-4

    def test_gram_with_log_vector(self):
        gd = gram_matrix(DilationBasis.integer(2), tol=1e-8, generator="log")
        assert gd.generator == "log"
        assert gd.chi_vector[0] < 0.0  # log is negative on (0,1)
        ref = gram_matrix(DilationBasis.integer(2), tol=1e-8)
        np.testing.assert_allclose(gd.matrix, ref.matrix, atol=1e-8)
