import math

import numpy as np
import pytest

from gaussbm import _combo_np
from gaussbm.distributions import TruncatedGaussian, sample
from gaussbm.errors import DomainError, UnsupportedFamilyError
from gaussbm.geometry import (
    Box,
    Ellipsoid,
    HPolytopeSym,
    MinkowskiCombination,
    PNormBall,
    asymmetry_counterexample,
    classify_points,
    combo_membership,
    direction_net,
    gaussian_measure_exact,
    gaussian_measure_mc,
    geometric_bm_check,
    point_mass_candidate,
    restricted_measure,
    restriction_candidate,
    scaled_restriction,
    uniform_candidate,
    variational_principle_check,
)
from gaussbm.rng import stream

# frozen via mpmath normal-CDF closed forms (40 digits)
GAMMA_1 = 0.6826894921370859
GAMMA_2 = 0.9544997361036416
GAMMA_15 = 0.8663855974622839
GAMMA_HALF = 0.3829249225480262
GAMMA_25_35 = 0.005977036246740610
GEO_GAP_FIXTURE = 0.04779098334192013
COUNTEREXAMPLE_GAP = -0.3353677098218023
D_RESTRICTION = 0.3817151463021261
D_UNIFORM = 0.3924580193113941
EXP_NEG_D_UNIFORM = 0.6753946992919995


def _pair_catalog():
    e = Ellipsoid(np.array([[1.0, 0.3], [0.3, 2.0]]))
    return [
        (Box((1.0, 1.0)), Box((2.0, 2.0))),
        (Box((1.0, 0.5)), e),
        (e, PNormBall(1.0, 1.5, 2)),
        (PNormBall(2.0, 1.0, 2), PNormBall(2.0, 1.3, 2)),
        (HPolytopeSym(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
                      np.array([1.0, 1.0, 1.5])), Box((0.8, 0.8))),
    ]


class TestBodies:
    def test_box_basics(self):
        b = Box((1.0, 2.0))
        assert b.dim == 2
        assert b.membership(np.array([0.9, -1.9]))
        assert not b.membership(np.array([1.1, 0.0]))
        np.testing.assert_allclose(b.projection(np.array([3.0, -5.0])), [1.0, -2.0])
        assert b.support(np.array([1.0, 1.0])) == pytest.approx(3.0)
        assert b.support(np.array([-1.0, 0.0])) == pytest.approx(1.0)

    def test_box_validation(self):
        with pytest.raises(ValueError):
            Box((1.0, -0.5))
        with pytest.raises(ValueError):
            Box(())

    def test_ellipsoid_closed_forms(self):
        e = Ellipsoid(np.diag([1.0, 4.0]))
        assert e.membership(np.array([0.9, 0.0]))
        assert not e.membership(np.array([0.0, 0.6]))
        np.testing.assert_allclose(e.projection(np.array([2.0, 0.0])), [1.0, 0.0],
                                   atol=1e-10)
        assert e.support(np.array([1.0, 0.0])) == pytest.approx(1.0)
        assert e.support(np.array([0.0, 1.0])) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            Ellipsoid(np.array([[1.0, 2.0], [2.0, 1.0]]))  # indefinite
        with pytest.raises(ValueError):
            Ellipsoid(np.array([[1.0, 0.5], [0.0, 1.0]]))  # not symmetric

    def test_ellipsoid_projection_is_idempotent_fixed_point(self):
        e = Ellipsoid(np.array([[2.0, 0.4], [0.4, 1.0]]))
        gen = stream(7, "ell-proj")
        for _ in range(20):
            x = gen.normal(size=2) * 2.0
            p = e.projection(x)
            q = np.einsum("i,ij,j->", p, e.a, p)
            if e.membership(x):
                np.testing.assert_allclose(p, x)
            else:
                assert q == pytest.approx(1.0, abs=1e-9)
                # projection residual must be parallel to the boundary normal
                normal = e.a @ p
                r = x - p
                cross = r[0] * normal[1] - r[1] * normal[0]
                assert abs(cross) <= 1e-8 * np.linalg.norm(r) * np.linalg.norm(normal)

    def test_pnorm_closed_forms(self):
        l1 = PNormBall(1.0, 1.0, 2)
        np.testing.assert_allclose(l1.projection(np.array([2.0, 0.0])), [1.0, 0.0])
        np.testing.assert_allclose(l1.projection(np.array([1.0, 1.0])), [0.5, 0.5])
        assert l1.support(np.array([3.0, 4.0])) == pytest.approx(4.0)
        l2 = PNormBall(2.0, 2.0, 3)
        np.testing.assert_allclose(l2.projection(np.array([4.0, 0.0, 0.0])),
                                   [2.0, 0.0, 0.0])
        assert l2.support(np.array([3.0, 4.0, 0.0])) == pytest.approx(10.0)
        linf = PNormBall(math.inf, 1.5, 2)
        assert linf.membership(np.array([1.5, -1.5]))
        assert linf.support(np.array([1.0, -1.0])) == pytest.approx(3.0)

    def test_pnorm_general_p(self):
        b = PNormBall(3.0, 1.0, 2)
        assert b.membership(np.array([0.9, 0.0]))
        # dual exponent 3/2
        assert b.support(np.array([1.0, 1.0])) == pytest.approx(2.0 ** (2.0 / 3.0))
        with pytest.raises(UnsupportedFamilyError):
            b._descriptor()
        with pytest.raises(ValueError):
            PNormBall(0.5, 1.0, 2)

    def test_hpolytope_matches_box(self):
        hp = HPolytopeSym(np.eye(2), np.array([1.0, 2.0]))
        box = Box((1.0, 2.0))
        pts = stream(1, "hp").standard_normal((500, 2)) * 1.5
        np.testing.assert_array_equal(hp.membership(pts), box.membership(pts))
        assert hp.support(np.array([1.0, 1.0])) == pytest.approx(3.0, abs=1e-9)
        np.testing.assert_allclose(hp.projection(np.array([3.0, -5.0])), [1.0, -2.0],
                                   atol=1e-10)

    def test_hpolytope_unbounded_rejected(self):
        with pytest.raises(ValueError):
            HPolytopeSym(np.array([[1.0, 0.0]]), np.array([1.0]))

    def test_hpolytope_validation(self):
        with pytest.raises(ValueError):
            HPolytopeSym(np.eye(2), np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            HPolytopeSym(np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([1.0, 1.0]))

    def test_membership_is_even(self):
        for k0, k1 in _pair_catalog():
            for body in (k0, k1):
                pts = stream(2, "even").standard_normal((200, body.dim))
                np.testing.assert_array_equal(body.membership(pts),
                                              body.membership(-pts))


class TestDirectionNet:
    def test_shapes_and_norms(self):
        assert direction_net(1).shape == (2, 1)
        assert direction_net(2).shape == (256, 2)
        assert direction_net(3).shape == (1024, 3)
        assert direction_net(4).shape == (1024 + 8, 4)
        for d in (1, 2, 3, 4):
            net = direction_net(d)
            np.testing.assert_allclose(np.linalg.norm(net, axis=1), 1.0, rtol=1e-12)

    def test_cached(self):
        assert direction_net(2) is direction_net(2)


class TestComboMembership:
    def test_box_sum_examples(self):
        mc = MinkowskiCombination(Box((1.0, 1.0)), Box((2.0, 2.0)), 0.5)
        assert combo_membership(mc, np.array([1.4, 0.0])) == "inside"
        assert combo_membership(mc, np.array([1.6, 0.0])) == "outside"

    def test_disk_boundary_uncertain(self):
        d = PNormBall(2.0, 1.0, 2)
        mc = MinkowskiCombination(d, d, 0.5)
        assert combo_membership(mc, np.array([1.0, 0.0]), tol=1e-12) == \
            "boundary_uncertain"

    def test_endpoint_combinations(self):
        mc = MinkowskiCombination(Box((1.0,)), Box((2.0,)), 0.0)
        assert combo_membership(mc, np.array([1.5])) == "outside"
        mc = MinkowskiCombination(Box((1.0,)), Box((2.0,)), 1.0)
        assert combo_membership(mc, np.array([1.5])) == "inside"

    def test_tol_validation(self):
        mc = MinkowskiCombination(Box((1.0,)), Box((2.0,)), 0.5)
        with pytest.raises(ValueError):
            combo_membership(mc, np.array([0.0]), tol=0.0)

    def test_t_validation(self):
        with pytest.raises(ValueError):
            MinkowskiCombination(Box((1.0,)), Box((2.0,)), 1.5)
        with pytest.raises(ValueError):
            MinkowskiCombination(Box((1.0,)), Box((2.0, 2.0)), 0.5)

    def test_box_identity_closed_form(self):
        # (1-t)Box(a) + tBox(b) = Box((1-t)a + tb); agreement outside the shell
        a = np.array([1.0, 0.6])
        b = np.array([1.5, 2.0])
        t = 0.3
        mc = MinkowskiCombination(Box(tuple(a)), Box(tuple(b)), t)
        combined = (1 - t) * a + t * b
        pts = stream(11, "box-identity").standard_normal((10_000, 2)) * 1.3
        verdict = classify_points(mc, pts, tol=1e-9)
        exact = np.all(np.abs(pts) <= combined, axis=1)
        decided = verdict != 0
        np.testing.assert_array_equal(verdict[decided] == 1, exact[decided])
        # the uncertain shell is a measure-zero sliver; random points miss it
        assert np.sum(~decided) == 0

    def test_support_consistency_for_inside(self):
        for k0, k1 in _pair_catalog():
            mc = MinkowskiCombination(k0, k1, 0.4)
            pts = stream(13, "support").standard_normal((2_000, 2)) * 1.2
            verdict = classify_points(mc, pts, tol=1e-9)
            net = direction_net(2)
            h = mc.support(net)
            inside = pts[verdict == 1]
            assert np.all(inside @ net.T <= h + 1e-9)

    def test_combination_with_self_is_identity(self):
        e = Ellipsoid(np.array([[1.0, 0.2], [0.2, 0.8]]))
        mc = MinkowskiCombination(e, e, 0.37)
        pts = stream(17, "self-combo").standard_normal((3_000, 2)) * 1.1
        verdict = classify_points(mc, pts, tol=1e-9)
        exact = e.membership(pts)
        decided = verdict != 0
        np.testing.assert_array_equal(verdict[decided] == 1, exact[decided])
        assert np.mean(~decided) < 1e-2


class TestKernelBackends:
    def test_backends_agree(self):
        pytest.importorskip("gaussbm._combo_cy")
        from gaussbm import _combo_cy
        from gaussbm.geometry import _combo_call_args

        gen = stream(19, "backend-agree")
        for k0, k1 in _pair_catalog():
            pts = gen.standard_normal((2_000, 2)) * 1.4
            for t in (0.25, 0.5, 0.75):
                args = _combo_call_args(MinkowskiCombination(k0, k1, t), 1e-9, 500)
                va = _combo_cy.classify_batch(pts, *args)
                vb = _combo_np.classify_batch(pts, *args)
                np.testing.assert_array_equal(va, vb)

    def test_projection_helper_matches_bodies(self):
        gen = stream(23, "proj-helper")
        for k0, k1 in _pair_catalog():
            for body in (k0, k1):
                try:
                    desc = body._descriptor()
                except UnsupportedFamilyError:
                    continue
                x = gen.normal(size=(50, body.dim)) * 2.0
                proj = _combo_np.project_points(x, *desc)
                # projections land in the body (up to iterative tolerance)
                net = direction_net(body.dim)
                h = body.support(net)
                assert np.all(proj @ net.T <= h + 1e-7)


class TestMeasures:
    def test_exact_values(self):
        assert gaussian_measure_exact(Box((1.0,))) == pytest.approx(GAMMA_1, abs=1e-14)
        assert gaussian_measure_exact(Box((2.0,))) == pytest.approx(GAMMA_2, abs=1e-14)
        assert gaussian_measure_exact(Box((1.0, 2.0))) == pytest.approx(
            GAMMA_1 * GAMMA_2, abs=1e-14)
        assert gaussian_measure_exact(PNormBall(math.inf, 1.0, 3)) == pytest.approx(
            GAMMA_1**3, abs=1e-14)
        combo = MinkowskiCombination(Box((1.0,)), Box((2.0,)), 0.5)
        assert gaussian_measure_exact(combo) == pytest.approx(GAMMA_15, abs=1e-14)
        disk = PNormBall(2.0, 1.0, 2)
        assert gaussian_measure_exact(disk) == pytest.approx(
            -math.expm1(-0.5), abs=1e-14)
        ball = Ellipsoid(np.eye(2) * 0.25)  # radius-2 disk
        assert gaussian_measure_exact(ball) == pytest.approx(
            -math.expm1(-2.0), abs=1e-14)

    def test_exact_unsupported(self):
        with pytest.raises(UnsupportedFamilyError):
            gaussian_measure_exact(Ellipsoid(np.diag([1.0, 2.0, 3.0])))

    def test_mc_interval_fixtures(self):
        for hw, want in ((1.0, GAMMA_1), (2.0, GAMMA_2)):
            est = gaussian_measure_mc(Box((hw,)), samples=200_000, seed=3)
            assert est.uncertain_fraction == 0.0
            assert not est.unreliable
            assert abs(est.estimate - want) <= 3.0 * est.std_error + 1e-12

    def test_mc_full_space_scale(self):
        est = gaussian_measure_mc(Box((100.0,)), samples=50_000, seed=4)
        assert est.estimate == 1.0
        assert est.std_error == 0.0

    def test_mc_deterministic(self):
        a = gaussian_measure_mc(Box((1.0, 1.0)), samples=100_000, seed=5)
        b = gaussian_measure_mc(Box((1.0, 1.0)), samples=100_000, seed=5)
        assert a == b
        c = gaussian_measure_mc(Box((1.0, 1.0)), samples=100_000, seed=6)
        assert c.estimate != a.estimate

    def test_mc_combination_of_self(self):
        e = Ellipsoid(np.array([[1.0, 0.2], [0.2, 0.8]]))
        base = gaussian_measure_mc(e, samples=150_000, seed=7)
        mc = gaussian_measure_mc(MinkowskiCombination(e, e, 0.5),
                                 samples=150_000, seed=8)
        joint = math.hypot(base.std_error, mc.std_error)
        assert abs(base.estimate - mc.estimate) <= 4.0 * joint
        assert mc.uncertain_fraction <= 1e-3

    def test_mc_unreliable_flag(self):
        d = PNormBall(2.0, 1.0, 2)
        est = gaussian_measure_mc(MinkowskiCombination(d, d, 0.5),
                                  samples=20_000, seed=9, tol=0.3)
        assert est.uncertain_fraction > 1e-3
        assert est.unreliable

    def test_mc_validates_samples(self):
        with pytest.raises(ValueError):
            gaussian_measure_mc(Box((1.0,)), samples=0)


class TestGeometricCheck:
    def test_interval_fixture(self):
        chk = geometric_bm_check(Box((1.0,)), Box((2.0,)), 0.5)
        assert chk.lhs == pytest.approx(GAMMA_15, abs=1e-14)
        assert chk.rhs == pytest.approx(0.5 * (GAMMA_1 + GAMMA_2), abs=1e-14)
        assert chk.gap == pytest.approx(GEO_GAP_FIXTURE, abs=1e-12)
        assert chk.confidence_gap == pytest.approx(chk.gap, abs=1e-14)
        assert not chk.unreliable

    def test_same_handle_gap_is_exactly_zero(self):
        e = Ellipsoid(np.array([[1.0, 0.1], [0.1, 1.5]]))
        chk = geometric_bm_check(e, e, 0.7, samples=1000)
        assert chk.gap == 0.0
        assert chk.confidence_gap == 0.0

    def test_2d_mc_pair(self):
        e = Ellipsoid(np.diag([1.0, 0.25]))
        chk = geometric_bm_check(e, Box((1.0, 1.0)), 0.5, samples=200_000, seed=2)
        assert chk.confidence_gap >= 0.0
        assert not chk.unreliable

    def test_3d_polytope_pair(self):
        # coarse 3D net leaves an outside band; the residual-direction
        # support test has to resolve it or the estimate goes unreliable
        mc = MinkowskiCombination(PNormBall(1.0, 1.5, 3), Box((0.7, 0.7, 0.7)), 0.5)
        est = gaussian_measure_mc(mc, samples=200_000, seed=3)
        assert est.uncertain_fraction <= 1e-4
        assert not est.unreliable
        chk = geometric_bm_check(PNormBall(1.0, 1.5, 3), Box((0.7, 0.7, 0.7)), 0.5,
                                 samples=200_000, seed=3)
        assert chk.confidence_gap >= 0.0
        assert not chk.unreliable

    def test_box_pair_any_dim_exact(self):
        chk = geometric_bm_check(Box((1.0, 1.0)), Box((2.0, 2.0)), 0.25)
        assert chk.lhs_std_error == 0.0
        assert chk.gap >= 0.0

    def test_t_validation(self):
        with pytest.raises(ValueError):
            geometric_bm_check(Box((1.0,)), Box((2.0,)), 1.2)


class TestAsymmetryCounterexample:
    def test_shift_six_fixture(self):
        chk = asymmetry_counterexample(Box((1.0,)), 6.0, 0.5)
        assert chk.lhs == pytest.approx(GAMMA_25_35, abs=1e-12)
        assert chk.rhs == pytest.approx(GAMMA_1 / 2, abs=1e-14)
        assert chk.gap == pytest.approx(COUNTEREXAMPLE_GAP, abs=1e-12)
        assert chk.gap < 0.0

    def test_zero_shift_still_dominates(self):
        chk = asymmetry_counterexample(Box((1.0,)), 0.0, 0.5)
        assert chk.lhs == pytest.approx(GAMMA_HALF, abs=1e-12)
        assert chk.gap > 0.0

    def test_endpoint_exact_zero(self):
        chk = asymmetry_counterexample(Box((1.0,)), 6.0, 0.0)
        assert chk.gap == 0.0

    def test_2d_large_shift_goes_negative(self):
        chk = asymmetry_counterexample(Box((1.0, 1.0)), np.array([8.0, 0.0]), 0.5)
        assert chk.gap < 0.0

    def test_non_box_rejected(self):
        with pytest.raises(UnsupportedFamilyError):
            asymmetry_counterexample(Ellipsoid(np.eye(2)), 6.0, 0.5)


class TestRestrictedMeasure:
    def test_returns_truncated_gaussian(self):
        t = restricted_measure(Box((1.0,)))
        assert isinstance(t, TruncatedGaussian)
        assert t.dim == 1
        assert t.body.contains(np.array([[0.5]]))

    def test_tiny_body_rejected(self):
        with pytest.raises(DomainError):
            restricted_measure(Box((1e-10,)))

    def test_huge_box_moments(self):
        t = restricted_measure(Box((50.0, 50.0)))
        pts = sample(t, 20_000, seed=12).points
        se = 1.0 / math.sqrt(20_000)
        assert np.all(np.abs(pts.mean(axis=0)) <= 4 * se)
        assert np.all(np.abs(pts.var(axis=0) - 1.0) <= 5 * se)

    def test_symmetric_mean(self):
        t = restricted_measure(Box((1.0,)))
        pts = sample(t, 30_000, seed=13).points
        sd = float(pts.std())
        assert abs(float(pts.mean())) <= 3 * sd / math.sqrt(30_000)


class TestVariationalPrinciple:
    def test_restriction_attains_equality(self):
        k = Box((1.0,))
        rep = variational_principle_check(k, [restriction_candidate(k)])
        assert rep.measure == pytest.approx(GAMMA_1, abs=1e-14)
        entry = rep.results[0]
        assert entry.entropy == pytest.approx(D_RESTRICTION, abs=1e-8)
        assert entry.exponential == pytest.approx(GAMMA_1, abs=1e-6)
        assert rep.attained_by_restriction
        assert rep.best_exponential == pytest.approx(GAMMA_1, abs=1e-6)

    def test_uniform_strictly_below(self):
        k = Box((1.0,))
        rep = variational_principle_check(
            k, [restriction_candidate(k), uniform_candidate(1.0)])
        uni = rep.results[1]
        assert uni.entropy == pytest.approx(D_UNIFORM, abs=1e-8)
        assert uni.exponential == pytest.approx(EXP_NEG_D_UNIFORM, abs=1e-8)
        assert uni.exponential < rep.measure
        assert uni.bound_ok

    def test_point_mass(self):
        k = Box((1.0,))
        rep = variational_principle_check(k, [point_mass_candidate()])
        assert rep.results[0].exponential == 0.0
        assert math.isinf(rep.results[0].entropy)
        assert rep.results[0].bound_ok

    def test_unsupported_candidate_rejected(self):
        k = Box((1.0,))
        rep = variational_principle_check(k, [scaled_restriction(k, 1.2)])
        assert not rep.results[0].supported
        assert "exceeds" in rep.results[0].note

    def test_shrunken_restriction_below(self):
        k = Box((1.0,))
        rep = variational_principle_check(k, [scaled_restriction(k, 0.8)])
        entry = rep.results[0]
        assert entry.supported
        assert entry.bound_ok
        assert entry.exponential < rep.measure

    def test_non_1d_rejected(self):
        with pytest.raises(UnsupportedFamilyError):
            variational_principle_check(Box((1.0, 1.0)), [])
