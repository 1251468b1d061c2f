import math
from dataclasses import dataclass

import numpy as np
import pytest
from scipy.stats import norm

from gaussbm.distributions import (
    GaussianZeroMean,
    OneDPotential,
    ProductOfOneD,
    TruncatedGaussian,
    cdf_1d,
    ou_smooth,
    sample,
    validate,
)
from gaussbm.errors import SamplingError, UnsupportedFamilyError
from gaussbm.quadrature import adaptive_integral

PHI_AT_ONE = 0.8413447460685429  # Phi(1), error-function oracle


@dataclass(frozen=True)
class _Box:
    half_widths: tuple

    @property
    def dim(self):
        return len(self.half_widths)

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.all(np.abs(pts) <= np.asarray(self.half_widths), axis=-1)


@dataclass(frozen=True)
class _Ring:
    # symmetric but nonconvex: annulus 0.5 <= |x| <= 2
    @property
    def dim(self):
        return 2

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.linalg.norm(pts, axis=-1)
        return (r >= 0.5) & (r <= 2.0)


def quartic():
    return OneDPotential(
        u=lambda x: 0.5 * x**2 + x**4,
        du=lambda x: x + 4.0 * x**3,
        d2u=lambda x: 1.0 + 12.0 * x**2,
    )


def gaussian_potential(s2):
    return OneDPotential(
        u=lambda x: 0.5 * x**2 / s2,
        du=lambda x: x / s2,
        d2u=lambda x: np.full_like(np.asarray(x, dtype=float), 1.0 / s2),
    )


class TestValidate:
    def test_small_gaussian(self):
        d = validate(GaussianZeroMean(0.25 * np.eye(2)))
        assert d.even_ok and d.slc_ok
        assert d.worst_violation == 0.0

    def test_wide_gaussian_fails_slc(self):
        d = validate(GaussianZeroMean(4.0 * np.eye(2)))
        assert d.even_ok
        assert not d.slc_ok
        assert d.worst_violation == pytest.approx(3.0, abs=1e-12)

    def test_quartic(self):
        d = validate(quartic())
        assert d.even_ok and d.slc_ok
        assert d.worst_violation <= 1e-6

    def test_odd_potential_flagged(self):
        f = OneDPotential(
            u=lambda x: 0.5 * x**2 + 0.1 * x**3,
            du=lambda x: x + 0.3 * x**2,
            d2u=lambda x: 1.0 + 0.6 * x,
        )
        d = validate(f)
        assert not d.even_ok

    def test_product(self):
        d = validate(ProductOfOneD((quartic(), gaussian_potential(0.5))))
        assert d.even_ok and d.slc_ok

    def test_truncated_box(self):
        d = validate(TruncatedGaussian(_Box((1.0, 1.5))))
        assert d.even_ok and d.slc_ok

    def test_nonconvex_body_rejected(self):
        with pytest.raises(ValueError):
            validate(TruncatedGaussian(_Ring()))

    def test_constructor_rejects_non_spd(self):
        with pytest.raises(ValueError):
            GaussianZeroMean(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestOuSmooth:
    def test_epsilon_range(self):
        g = GaussianZeroMean(np.eye(1) * 0.25)
        for eps in (0.0, 0.5, 0.7, -0.1):
            with pytest.raises(ValueError):
                ou_smooth(g, eps)

    def test_gaussian_algebra(self):
        g = ou_smooth(GaussianZeroMean(np.eye(1) * 0.25), 0.2)
        assert g.cov[0, 0] == pytest.approx(0.4, rel=1e-14)

    def test_small_epsilon_near_identity(self):
        g = ou_smooth(GaussianZeroMean(np.eye(1) * 0.25), 1e-9)
        assert g.cov[0, 0] == pytest.approx(0.25, abs=1e-8)

    def test_hessian_sandwich_gaussian(self):
        gen_cov = np.diag([0.2, 0.7, 1.0])
        for eps in (0.05, 0.2, 0.45):
            g = ou_smooth(GaussianZeroMean(gen_cov), eps)
            hess_eigs = 1.0 / np.linalg.eigvalsh(g.cov)
            assert np.all(hess_eigs >= 1.0 - 1e-12)
            assert np.all(hess_eigs <= 1.0 / eps + 1e-12)

    def test_evolute_matches_gaussian_closed_form(self):
        # numeric kernel smoothing of N(0, 0.25) against the exact algebra
        eps = 0.2
        ev = ou_smooth(gaussian_potential(0.25), eps)
        s2 = (1 - eps) * 0.25 + eps
        x = np.linspace(-2.5, 2.5, 41)
        np.testing.assert_allclose(ev.du(x), x / s2, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(
            ev.d2u(x), np.full_like(x, 1.0 / s2), rtol=1e-8
        )
        centered = ev.u(x) - ev.u(np.array([0.0]))[0]
        np.testing.assert_allclose(centered, 0.5 * x**2 / s2, rtol=1e-8, atol=1e-9)

    def test_evolute_of_quartic_is_valid(self):
        eps = 0.1
        ev = ou_smooth(quartic(), eps)
        d = validate(ev)
        assert d.even_ok and d.slc_ok
        x = np.linspace(-3.0, 3.0, 31)
        assert np.all(ev.d2u(x) <= 1.0 / eps + 1e-9)

    def test_truncated_box_evolute(self):
        eps = 0.15
        ev = ou_smooth(TruncatedGaussian(_Box((1.0,))), eps)
        assert isinstance(ev, OneDPotential)
        d = validate(ev)
        assert d.even_ok and d.slc_ok
        # closed form: the smoothed density is
        #   exp(-x^2/2) * [Phi((1 - s x)/sqrt(eps)) - Phi(-(1 + s x)/sqrt(eps))]
        s = math.sqrt(1 - eps)
        x = np.linspace(-1.5, 1.5, 21)
        mass = norm.cdf((1 - s * x) / math.sqrt(eps)) - norm.cdf(
            -(1 + s * x) / math.sqrt(eps)
        )
        want = 0.5 * x**2 - np.log(mass)
        got = ev.u(x)
        np.testing.assert_allclose(
            got - got[10], want - want[10], rtol=1e-7, atol=1e-8
        )

    def test_truncated_2d_box_evolute_is_product(self):
        ev = ou_smooth(TruncatedGaussian(_Box((1.0, 2.0))), 0.1)
        assert isinstance(ev, ProductOfOneD)
        assert ev.dim == 2

    def test_non_box_body_rejected(self):
        class _Ball:
            dim = 2

            def contains(self, pts):
                pts = np.atleast_2d(pts)
                return np.linalg.norm(pts, axis=-1) <= 1.0

        with pytest.raises(UnsupportedFamilyError):
            ou_smooth(TruncatedGaussian(_Ball()), 0.1)


class TestSample:
    def test_determinism(self):
        g = GaussianZeroMean(0.25 * np.eye(2))
        a = sample(g, 512, 42)
        b = sample(g, 512, 42)
        np.testing.assert_array_equal(a.points, b.points)
        c = sample(g, 512, 43)
        assert not np.array_equal(a.points, c.points)

    def test_gaussian_variance(self):
        n = 200_000
        s = sample(GaussianZeroMean(np.eye(1) * 0.25), n, 7)
        var = s.points.var()
        assert abs(var - 0.25) <= 3.0 * math.sqrt(2.0 / n) * 0.25

    def test_gaussian_full_covariance(self):
        cov = np.array([[0.8, 0.3], [0.3, 0.5]])
        n = 200_000
        s = sample(GaussianZeroMean(cov), n, 11)
        emp = s.points.T @ s.points / n
        for i in range(2):
            for j in range(2):
                se = math.sqrt((cov[i, i] * cov[j, j] + cov[i, j] ** 2) / n)
                assert abs(emp[i, j] - cov[i, j]) <= 4.0 * se

    def test_quartic_moments(self):
        f = quartic()
        rho = lambda x: np.exp(-f.u(x))
        z = adaptive_integral(rho, -f.radius, f.radius, rtol=1e-12)
        m2 = adaptive_integral(lambda x: x**2 * rho(x), -f.radius, f.radius,
                               rtol=1e-12) / z
        m4 = adaptive_integral(lambda x: x**4 * rho(x), -f.radius, f.radius,
                               rtol=1e-12) / z
        n = 100_000
        s = sample(f, n, 23)
        pts = s.points.ravel()
        se2 = math.sqrt(max(m4 - m2 * m2, 1e-12) / n)
        assert abs(pts.mean()) <= 3.0 * math.sqrt(m2 / n)
        assert abs((pts**2).mean() - m2) <= 4.0 * se2

    def test_truncated_box(self):
        body = _Box((1.0,))
        n = 50_000
        s = sample(TruncatedGaussian(body), n, 5)
        pts = s.points.ravel()
        assert np.all(np.abs(pts) <= 1.0)
        assert abs(pts.mean()) <= 3.0 * pts.std() / math.sqrt(n)

    def test_tiny_body_raises(self):
        with pytest.raises(SamplingError):
            sample(TruncatedGaussian(_Box((1e-4, 1e-4))), 10, 3)

    def test_product_shape(self):
        p = ProductOfOneD((quartic(), gaussian_potential(0.5)))
        s = sample(p, 1000, 9)
        assert s.points.shape == (1000, 2)
        assert s.dimension == 2

    def test_count_positive(self):
        with pytest.raises(ValueError):
            sample(GaussianZeroMean(np.eye(1)), 0, 1)


class TestCdf1d:
    def test_even_midpoint(self):
        assert cdf_1d(quartic(), 0.0) == pytest.approx(0.5, abs=1e-10)

    def test_standard_gaussian(self):
        g = GaussianZeroMean(np.eye(1))
        assert cdf_1d(g, 1.0) == pytest.approx(PHI_AT_ONE, rel=1e-12)

    def test_truncation_boundary(self):
        f = quartic()
        assert cdf_1d(f, -f.radius) <= 1e-10
        assert cdf_1d(f, f.radius) >= 1.0 - 1e-10

    def test_odd_symmetry_and_monotone(self):
        f = quartic()
        xs = np.linspace(-2.0, 2.0, 9)
        vals = [cdf_1d(f, float(x)) for x in xs]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        for x, v in zip(xs, vals):
            assert v + cdf_1d(f, float(-x)) == pytest.approx(1.0, abs=1e-9)

    def test_gaussian_potential_route_agrees(self):
        # same law two ways: closed form vs quadrature of exp(-u)
        g = GaussianZeroMean(np.eye(1) * 0.25)
        f = gaussian_potential(0.25)
        for x in (-1.2, -0.3, 0.4, 1.7):
            assert cdf_1d(f, x) == pytest.approx(cdf_1d(g, x), abs=1e-9)

    def test_rejects_multid(self):
        with pytest.raises(UnsupportedFamilyError):
            cdf_1d(GaussianZeroMean(np.eye(2)), 0.5)
