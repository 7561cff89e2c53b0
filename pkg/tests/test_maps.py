"""
映射模块测试
"""
import math

import numpy as np
import pytest

from src.models.entities import Verdict
from src.models.errors import (
    DegenerateDenominator, DimMismatch, KTooLargeForExact, NotInPositivePart, NotOnSphere,
    TargetNotPositiveFacet,
)
from src.modules.maps import (
    FunctionMap, MapProperties, abs_wrapper, check_equivariance_implies_step,
    check_non_increasing_support, check_reference_agreement, check_roundtrip, check_sphere_image,
    check_step_preserving, check_support_preserving, compose, constant_map, integral_homeo,
    integral_homeo_inverse, mazur_map, normalize_map, phi_map, sample_sphere_points, step_spread,
    symmetrize,
)
from src.modules.norms import LinfNorm, LrNorm
from src.modules.vectors import DenseVector, PcpVector, from_dense, materialize


def dense(*values):
    return DenseVector(np.array(values, dtype=np.float64))


def p_seed(p):
    return int(p * 10)


def weighted_map(k):
    """不等变、不保步：按下标加权后 ℓ₁ 归一化"""
    weights = np.arange(1, k + 1, dtype=np.float64)
    return FunctionMap(k, lambda a: a * weights / np.sum(np.abs(a * weights)), LrNorm(1.0), name="weighted")


def leaky_map(k):
    """不保支撑：每个坐标加一个小常数"""
    def func(a):
        out = np.abs(a) + 0.01
        return out / out.sum()
    return FunctionMap(k, func, LrNorm(1.0), name="leaky", positive_domain=True)


class TestNormalizeMap:
    def test_l1_separation(self, l1):
        F = normalize_map(19, l1)
        e1 = PcpVector.basis(19, 1)
        block = PcpVector.constant(19, 1.0)
        assert F.image_distance(e1, block) == pytest.approx(36 / 19, abs=1e-14)

    def test_pcp_matches_dense(self, l2):
        F = normalize_map(7, l2)
        x = PcpVector(7, ((1, 4, 1.0, -0.5), (5, 7, 0.25, 0.25)))
        np.testing.assert_allclose(materialize(F(x)).coords, F(materialize(x)).coords, atol=1e-15)
        assert isinstance(F(x), PcpVector)

    def test_degenerate(self, l1):
        with pytest.raises(DegenerateDenominator):
            normalize_map(3, l1)(PcpVector.constant(3, 0.0))

    def test_dim_mismatch(self, l1):
        with pytest.raises(DimMismatch):
            normalize_map(3, l1)(PcpVector.constant(4, 1.0))

    def test_equivariance_flag(self, l1):
        assert normalize_map(4, l1).props.permutation_equivariant


class TestPhiMap:
    def test_identity_is_l1_normalize(self, l1):
        F = phi_map(4, lambda t: np.asarray(t, dtype=np.float64))
        x = dense(1.0, -0.5, 0.5, 0.0)
        np.testing.assert_allclose(F(x).coords, normalize_map(4, l1)(x).coords)

    def test_pcp_path(self):
        F = phi_map(6, lambda t: np.sign(t) * np.abs(t) ** 2)
        x = PcpVector(6, ((1, 6, 1.0, 0.5),))
        np.testing.assert_allclose(materialize(F(x)).coords, F(materialize(x)).coords, atol=1e-15)

    def test_per_coordinate_functions_not_step(self):
        F = phi_map(2, [lambda t: t, lambda t: 2 * t])
        assert not F.props.step_preserving
        assert not F.pcp_capable
        assert check_step_preserving(F, [dense(1.0, 1.0)]).verdict == Verdict.FAIL

    def test_affine_not_support_preserving(self):
        F = phi_map(3, lambda t: 0.5 + np.asarray(t))
        assert not F.props.non_increasing_support
        report = check_non_increasing_support(F, [dense(1.0, 0.0, 0.0)])
        assert report.verdict == Verdict.FAIL

    def test_degenerate(self):
        F = phi_map(2, lambda t: np.zeros_like(np.asarray(t, dtype=np.float64)))
        with pytest.raises(DegenerateDenominator):
            F(dense(1.0, 0.5))


class TestIntegralHomeomorphism:
    def test_values(self):
        F = integral_homeo(2)
        np.testing.assert_allclose(F(dense(1.0, 0.5)).coords, [0.75, 0.25])
        np.testing.assert_allclose(F(dense(1.0, 1.0)).coords, [0.5, 0.5])

    def test_inverse_values(self):
        G = integral_homeo_inverse(2)
        np.testing.assert_allclose(G(dense(0.75, 0.25)).coords, [1.0, 0.5])
        np.testing.assert_allclose(G(dense(0.5, 0.5)).coords, [1.0, 1.0])

    def test_positive_domain(self):
        with pytest.raises(NotInPositivePart):
            integral_homeo(2)(dense(1.0, -0.5))

    @pytest.mark.parametrize("x", [
        DenseVector(np.array([0.5, 0.25])),
        DenseVector(np.array([1.5, 0.0])),
        PcpVector(6, ((1, 3, 0.5, 0.5), (4, 6, 0.0, 0.0))),
    ])
    def test_requires_unit_sphere(self, x):
        F = integral_homeo(x.dim)
        with pytest.raises(NotOnSphere):
            F(x)
        with pytest.raises(NotOnSphere):
            F.closed_form(x)

    def test_closed_form_on_pcp_staircase(self):
        F = integral_homeo(6860)
        z = PcpVector(6860, ((1, 19, 1.0, 1.0), (20, 6859, 0.5, 0.5), (6860, 6860, 0.0, 0.0)))
        diff = F(z)
        ref = F.closed_form(z)
        assert max(abs(a - b) for a, b in zip(materialize(diff).coords, materialize(ref).coords)) < 1e-12

    def test_image_on_l1_facet(self):
        F = integral_homeo(16)
        samples = sample_sphere_points(16, 1000, 3, positive=True)
        assert check_sphere_image(F, samples).passed
        assert all(materialize(F(x)).coords.min() >= 0 for x in samples)

    @pytest.mark.parametrize("k", [2, 8, 64, 128])
    def test_roundtrip(self, k):
        F = integral_homeo(k)
        G = F.inverse()
        rng = np.random.default_rng(k)
        xs = sample_sphere_points(k, 1000, rng, positive=True)
        ys = [DenseVector(x.coords / x.coords.sum()) for x in sample_sphere_points(k, 1000, rng, positive=True)]
        assert check_roundtrip(F, G, xs, tol=1e-10).passed
        assert check_roundtrip(G, F, ys, tol=1e-10).passed

    def test_reference_agreement_on_non_increasing(self):
        F = integral_homeo(64)
        rng = np.random.default_rng(0)
        samples = [from_dense(np.sort(x.coords)[::-1]) for x in sample_sphere_points(64, 1000, rng, positive=True)]
        assert check_reference_agreement(F, samples, tol=1e-12).passed


class TestMazurMap:
    def test_value(self):
        F = mazur_map(1.0, 2)
        np.testing.assert_allclose(F(dense(0.5, -0.5)).coords, [math.sqrt(0.5), -math.sqrt(0.5)])

    def test_requires_unit_sphere(self):
        with pytest.raises(NotOnSphere):
            mazur_map(1.0, 2)(dense(1.0, 1.0))

    @pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
    def test_sphere_and_inverse(self, p):
        k = 64
        F = mazur_map(p, k)
        source = LrNorm(p)
        xs = [DenseVector(x.coords / source.eval(x)) for x in sample_sphere_points(k, 1000, p_seed(p))]
        assert check_sphere_image(F, xs, tol=1e-12).passed
        assert check_roundtrip(F, F.inverse(), xs, tol=1e-10).passed

    def test_general_target(self):
        F = mazur_map(1.0, 3, target_q=3.0)
        assert F.name == "mazur:1->3"
        assert F.inverse().name == "mazur:3->1"

    def test_compose_into_l2(self, l1):
        F = compose(mazur_map(1.0, 19), normalize_map(19, l1))
        out = F(PcpVector.constant(19, 1.0))
        assert LrNorm(2.0).eval(out) == pytest.approx(1.0)
        assert F.target_oracle.name == "l2"


class TestConstantMap:
    def test_uniform(self, l2):
        F = constant_map(4, l2)
        np.testing.assert_allclose(F(dense(1.0, 0.0, 0.0, 0.0)).coords, [0.5] * 4)
        assert F.props.step_preserving

    def test_not_support_preserving(self, l1):
        F = constant_map(4, l1)
        report = check_support_preserving(F, [dense(1.0, 0.0, 0.0, 0.0)])
        assert report.verdict == Verdict.FAIL


class TestWrappers:
    def test_abs(self, l1):
        F = abs_wrapper(normalize_map(3, l1))
        np.testing.assert_allclose(F(dense(-1.0, 0.5, 0.5)).coords, [0.5, 0.25, 0.25])
        assert F.name == "abs+normalize"

    def test_exact_symmetrization_is_equivariant(self, l1):
        F = symmetrize(abs_wrapper(weighted_map(4)), mode="exact")
        report = check_equivariance_implies_step(F, trials=30, seed=1)
        assert report.passed
        assert not report.notes["contradiction"]

    def test_exact_symmetrization_limit(self, l1):
        with pytest.raises(KTooLargeForExact):
            symmetrize(normalize_map(9, l1), mode="exact")

    def test_sampled_symmetrization_deterministic(self, l1):
        F = symmetrize(abs_wrapper(weighted_map(12)), mode="sampled", samples=20, seed=7)
        G = symmetrize(abs_wrapper(weighted_map(12)), mode="sampled", samples=20, seed=7)
        x = sample_sphere_points(12, 1, 0)[0]
        np.testing.assert_array_equal(F(x).coords, G(x).coords)
        assert LrNorm(1.0).eval(F(x)) == pytest.approx(1.0)
        assert F.name == "sym(20,7)+abs+weighted"

    def test_symmetrization_requires_positive_facet(self, l1):
        F = symmetrize(normalize_map(3, l1), mode="exact")
        with pytest.raises(TargetNotPositiveFacet):
            F(dense(1.0, -0.5, 0.0))


class TestPropertyCheckers:
    def test_step_spread(self):
        x = dense(1.0, 1.0, 0.5)
        y = dense(0.2, 0.3, 0.5)
        spread, level = step_spread(x, y)
        assert spread == pytest.approx(0.1)
        assert level == 1.0

    def test_broken_maps_detected(self):
        samples = sample_sphere_points(6, 100, 0, positive=True)
        assert check_step_preserving(weighted_map(6), samples).verdict == Verdict.FAIL
        assert check_support_preserving(leaky_map(6), samples).verdict == Verdict.FAIL
        assert check_non_increasing_support(leaky_map(6), samples).verdict == Verdict.FAIL
        report = check_equivariance_implies_step(weighted_map(6), trials=50)
        assert report.verdict == Verdict.FAIL
        assert report.hypothesis_values["equivariance_failures"] > 0

    @pytest.mark.parametrize("name", ["normalize-l1", "normalize-l2", "integral", "abs-normalize"])
    def test_catalog_maps_pass_declared_flags(self, name):
        k = 8
        F = {
            "normalize-l1": normalize_map(k, LrNorm(1.0)),
            "normalize-l2": normalize_map(k, LrNorm(2.0)),
            "integral": integral_homeo(k),
            "abs-normalize": abs_wrapper(normalize_map(k, LrNorm(1.0))),
        }[name]
        samples = sample_sphere_points(k, 1000, 11, positive=F.positive_domain)
        if F.props.step_preserving:
            assert check_step_preserving(F, samples).passed
        if F.props.support_preserving:
            assert check_support_preserving(F, samples).passed
        if F.props.non_increasing_support:
            assert check_non_increasing_support(F, samples).passed
        if F.props.permutation_equivariant:
            assert check_equivariance_implies_step(F, trials=200, seed=2).passed
        assert check_sphere_image(F, samples).passed

    def test_linf_normalize_is_identity_on_sphere(self):
        F = normalize_map(5, LinfNorm())
        x = sample_sphere_points(5, 1, 4)[0]
        np.testing.assert_allclose(F(x).coords, x.coords)

    def test_declared_props_roundtrip(self):
        props = MapProperties(step_preserving=True)
        assert props.to_dict()["step_preserving"]
        assert not props.to_dict()["support_preserving"]
