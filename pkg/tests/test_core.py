"""Tests for the scalar/matrix kernel: power means, sigma comparison, entropies, gaps.

Derived expected values were computed with an independent high-precision
oracle (mpmath at 40 digits) and frozen here.
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaussbm import (
    DomainError,
    entropic_bm_gaps,
    gaussian_relative_entropy,
    power_mean,
    sigma_comparison,
    spd_sqrt,
)
from gaussbm.core import as_spd, power_mean_vec
from gaussbm.rng import stream

# frozen oracle values (mpmath, 40 dps)
SIGMA_N2_HALFPI = 0.70710678118654752
D_COV_025 = 0.31814718055994531
D_COV_064 = 0.043143551314209756
D_COV_04225 = 0.14203291609245426
PLAIN_GAP_FIXTURE = 0.024957899351161135
SIGMA_GAP_FIXTURE_THETA1 = -0.24078058337698652
SIGMA_N1_T05_THETA1 = 0.65768306926916487
SIGMA_N3_T025_THETA13 = 0.30038902881887161


class TestPowerMean:
    def test_geometric_mean(self):
        assert power_mean(4.0, 1.0, 0.5, 0.0) == pytest.approx(2.0, rel=1e-14)

    def test_arithmetic_mean(self):
        assert power_mean(2.0, 4.0, 0.5, 1.0) == pytest.approx(3.0, rel=1e-14)

    def test_zero_factor_kills_mean(self):
        # the convention sets the mean to 0 whenever x*y = 0, any exponent
        for p in (-math.inf, -2.0, 0.0, 0.5, 2.0, math.inf):
            assert power_mean(3.0, 0.0, 0.5, p) == 0.0
            assert power_mean(0.0, 3.0, 0.25, p) == 0.0
            assert power_mean(0.0, 0.0, 0.9, p) == 0.0

    def test_infinite_exponents(self):
        assert power_mean(2.0, 5.0, 0.3, math.inf) == 5.0
        assert power_mean(2.0, 5.0, 0.3, -math.inf) == 2.0
        # endpoint t does not override min/max on positive inputs
        assert power_mean(2.0, 5.0, 0.0, math.inf) == 5.0
        assert power_mean(2.0, 5.0, 1.0, -math.inf) == 2.0

    def test_endpoints_finite_p(self):
        assert power_mean(2.0, 5.0, 0.0, 0.7) == pytest.approx(2.0, rel=1e-14)
        assert power_mean(2.0, 5.0, 1.0, 0.7) == pytest.approx(5.0, rel=1e-14)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            power_mean(1.0, 1.0, -0.1, 1.0)
        with pytest.raises(ValueError):
            power_mean(1.0, 1.0, 1.1, 1.0)
        with pytest.raises(ValueError):
            power_mean(-1.0, 1.0, 0.5, 1.0)
        with pytest.raises(ValueError):
            power_mean(math.nan, 1.0, 0.5, 1.0)
        with pytest.raises(ValueError):
            power_mean(math.inf, 1.0, 0.5, 1.0)
        with pytest.raises(ValueError):
            power_mean(1.0, 1.0, 0.5, math.nan)

    @given(
        x=st.floats(1e-3, 1e3),
        y=st.floats(1e-3, 1e3),
        t=st.floats(0.0, 1.0),
    )
    def test_monotone_in_p(self, x, y, t):
        grid = [-math.inf, -5.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0, math.inf]
        vals = [power_mean(x, y, t, p) for p in grid]
        for lo, hi in zip(vals, vals[1:]):
            assert hi >= lo * (1 - 1e-12)

    @given(
        a=st.floats(1e-2, 1e2),
        b=st.floats(1e-2, 1e2),
        x=st.floats(1e-2, 1e2),
        y=st.floats(1e-2, 1e2),
        p=st.floats(0.1, 10.0),
        q=st.floats(0.1, 10.0),
        t=st.floats(0.0, 1.0),
    )
    def test_holder_product(self, a, b, x, y, p, q, t):
        r = 1.0 / (1.0 / p + 1.0 / q)
        lhs = power_mean(a, b, t, p) * power_mean(x, y, t, q)
        rhs = power_mean(a * x, b * y, t, r)
        assert lhs >= rhs * (1 - 1e-12)

    @given(
        u1=st.floats(-50, 50), v1=st.floats(-50, 50),
        u2=st.floats(-50, 50), v2=st.floats(-50, 50),
        t=st.floats(0.0, 1.0),
    )
    def test_joint_convexity_of_log_mean(self, u1, v1, u2, v2, t):
        def psi(u, v):
            return math.log((1 - t) * math.exp(u) + t * math.exp(v))

        mid = psi(0.5 * (u1 + u2), 0.5 * (v1 + v2))
        avg = 0.5 * (psi(u1, v1) + psi(u2, v2))
        assert mid <= avg + 1e-10

    def test_vectorized_matches_scalar(self):
        gen = stream(77, "pm-vec")
        x = np.abs(gen.normal(size=32))
        y = np.abs(gen.normal(size=32))
        x[3] = 0.0
        y[11] = 0.0
        for p in (-math.inf, -1.0, 0.0, 0.5, 2.0, math.inf):
            vec = power_mean_vec(x, y, 0.4, p)
            ref = np.array([power_mean(a, b, 0.4, p) for a, b in zip(x, y)])
            np.testing.assert_allclose(vec, ref, rtol=1e-13, atol=0.0)


class TestSigmaComparison:
    def test_small_angle_limit(self):
        assert sigma_comparison(1, 1e-9, 0.3) == pytest.approx(0.3, rel=1e-12)

    def test_endpoint_t_one(self):
        for n in (1, 2, 5):
            assert sigma_comparison(n, 1.0, 1.0) == pytest.approx(1.0, rel=1e-12)

    def test_sine_ratio_example(self):
        got = sigma_comparison(2, math.pi / 2, 0.5)
        assert got == pytest.approx(SIGMA_N2_HALFPI, rel=1e-12)

    def test_frozen_values(self):
        assert sigma_comparison(1, 1.0, 0.5) == pytest.approx(
            SIGMA_N1_T05_THETA1, rel=1e-12
        )
        assert sigma_comparison(3, 1.3, 0.25) == pytest.approx(
            SIGMA_N3_T025_THETA13, rel=1e-12
        )

    def test_series_switch_is_seamless(self):
        # alpha = sqrt(2/n)*theta straddles the 1e-6 series threshold
        below = sigma_comparison(2, 0.9999e-6, 0.3)
        above = sigma_comparison(2, 1.0001e-6, 0.3)
        assert below == pytest.approx(0.30000000000004549, rel=1e-13)
        assert above == pytest.approx(0.30000000000004551, rel=1e-13)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            sigma_comparison(2, math.pi + 1e-9, 0.5)
        with pytest.raises(DomainError):
            sigma_comparison(1, math.pi / math.sqrt(2.0) * 1.01, 0.5)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            sigma_comparison(0, 0.5, 0.5)
        with pytest.raises(ValueError):
            sigma_comparison(2, -0.1, 0.5)
        with pytest.raises(ValueError):
            sigma_comparison(2, 0.5, 1.5)

    @given(theta=st.floats(1e-12, 3.1), t=st.floats(0.0, 1.0))
    def test_dominates_t(self, theta, t):
        assert sigma_comparison(2, theta, t) >= t - 1e-12

    @given(t=st.floats(0.01, 0.99))
    def test_increasing_in_theta(self, t):
        thetas = np.linspace(1e-4, 3.0, 40)
        vals = [sigma_comparison(2, th, t) for th in thetas]
        diffs = np.diff(vals)
        assert np.all(diffs >= -1e-13)


class TestSpd:
    def test_identity(self):
        np.testing.assert_allclose(spd_sqrt(np.eye(3)), np.eye(3), atol=1e-14)

    def test_diagonal(self):
        r = spd_sqrt(np.diag([0.25, 0.81]))
        np.testing.assert_allclose(r, np.diag([0.5, 0.9]), atol=1e-14)

    def test_reconstruction_residual(self):
        gen = stream(5150, "spd")
        for n in (2, 3, 6):
            a = gen.normal(size=(n, n))
            m = a @ a.T + 0.05 * np.eye(n)
            r = spd_sqrt(m)
            resid = np.linalg.norm(r @ r - m) / np.linalg.norm(m)
            assert resid <= 1e-10
            # result is itself symmetric PSD
            np.testing.assert_allclose(r, r.T, atol=1e-12)
            assert np.linalg.eigvalsh(r)[0] > 0

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError):
            spd_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError):
            spd_sqrt(np.diag([1.0, -0.5]))
        with pytest.raises(ValueError):
            as_spd(np.diag([1.0, 0.0]), "m")


class TestGaussianRelativeEntropy:
    def test_identity_is_zero(self):
        assert gaussian_relative_entropy(np.eye(4)) == pytest.approx(0.0, abs=1e-14)

    def test_scalar_quarter(self):
        got = gaussian_relative_entropy(np.array([[0.25]]))
        assert got == pytest.approx(D_COV_025, rel=1e-12)

    def test_quadrature_cross_check(self):
        # independent route: quadrature of the density-ratio integrand
        from scipy.integrate import quad

        s2 = 0.25

        def integrand(x):
            log_ratio = -0.5 * x * x / s2 + 0.5 * x * x - 0.5 * math.log(s2)
            dens = math.exp(-0.5 * x * x / s2) / math.sqrt(2 * math.pi * s2)
            return dens * log_ratio

        val, err = quad(integrand, -12, 12, epsabs=1e-13, epsrel=1e-13)
        assert val == pytest.approx(D_COV_025, abs=1e-10)

    def test_additivity(self):
        got = gaussian_relative_entropy(np.diag([0.25, 0.25]))
        assert got == pytest.approx(2 * D_COV_025, rel=1e-12)

    def test_orthogonal_invariance(self):
        gen = stream(99, "rot")
        for n in (2, 4):
            a = gen.normal(size=(n, n))
            m = a @ a.T + 0.1 * np.eye(n)
            q, _ = np.linalg.qr(gen.normal(size=(n, n)))
            d1 = gaussian_relative_entropy(m)
            d2 = gaussian_relative_entropy(q @ m @ q.T)
            assert abs(d1 - d2) <= 1e-10 * max(1.0, abs(d1))

    def test_nonnegative(self):
        gen = stream(13, "nonneg")
        for _ in range(20):
            w = gen.uniform(0.05, 3.0, size=3)
            assert gaussian_relative_entropy(np.diag(w)) >= -1e-14

    def test_rejects_non_spd(self):
        with pytest.raises(ValueError):
            gaussian_relative_entropy(np.diag([1.0, -1.0]))


class TestEntropicBmGaps:
    def test_equality_case(self):
        d = 0.37
        for t in (0.0, 0.25, 0.5, 1.0):
            g = entropic_bm_gaps(d, d, d, t, 3, 1e-12)
            assert g.plain_gap == pytest.approx(0.0, abs=1e-12)
            assert g.sigma_gap == pytest.approx(0.0, abs=1e-10)

    def test_gaussian_pair_fixture(self):
        g = entropic_bm_gaps(D_COV_025, D_COV_064, D_COV_04225, 0.5, 1, 0.0)
        assert g.plain_gap == pytest.approx(PLAIN_GAP_FIXTURE, rel=1e-10)

    def test_fixture_with_sigma_weights(self):
        g = entropic_bm_gaps(D_COV_025, D_COV_064, D_COV_04225, 0.5, 1, 1.0)
        assert g.sigma_gap == pytest.approx(SIGMA_GAP_FIXTURE_THETA1, rel=1e-10)
        assert g.sigma_gap <= g.plain_gap

    def test_endpoint(self):
        g = entropic_bm_gaps(0.3, 0.7, 0.3, 0.0, 2, 0.4)
        assert g.plain_gap == pytest.approx(0.0, abs=1e-14)

    @given(
        d0=st.floats(0.0, 2.0),
        d1=st.floats(0.0, 2.0),
        dt=st.floats(0.0, 2.0),
        t=st.floats(0.0, 1.0),
        theta=st.floats(0.0, 2.0),
    )
    def test_sigma_never_exceeds_plain(self, d0, d1, dt, t, theta):
        g = entropic_bm_gaps(d0, d1, dt, t, 2, theta)
        assert g.sigma_gap <= g.plain_gap + 1e-14

    def test_rejects_negative_entropy(self):
        with pytest.raises(ValueError):
            entropic_bm_gaps(-0.5, 0.1, 0.1, 0.5, 1, 0.0)

    def test_tiny_negative_entropy_clamped(self):
        g = entropic_bm_gaps(-1e-12, 0.0, 0.0, 0.5, 1, 0.0)
        assert g.plain_gap == pytest.approx(0.0, abs=1e-11)

    def test_domain_error_propagates(self):
        with pytest.raises(DomainError):
            entropic_bm_gaps(0.1, 0.1, 0.1, 0.5, 1, 3.0)
