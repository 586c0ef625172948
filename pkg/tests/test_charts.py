import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nbody_regularity import (DomainError, ModelChartPoint, NonFinite, PoleError, SingularMap, affine_extend,
                              boundary_depth, boundary_ray, is_compact_point, is_ray, onepoint_psi,
                              onepoint_psi_from_theta_x, roundtrip_errors, stereographic, stereographic_inv, theta,
                              theta_inv, theta_x)

finite = st.floats(-1e6, 1e6, allow_nan=False)


class TestTheta:
    def test_origin(self):
        np.testing.assert_array_equal(theta([0.0, 0.0]), [1.0, 0.0, 0.0])

    def test_unit_vector(self):
        np.testing.assert_allclose(theta([1.0, 0.0]), [1 / math.sqrt(2), 1 / math.sqrt(2), 0.0])

    def test_nonfinite(self):
        with pytest.raises(NonFinite):
            theta([np.inf, 0.0])

    def test_inverse_examples(self):
        x, ray = theta_inv([1.0, 0.0, 0.0])
        assert not ray and np.all(x == 0)
        d, ray = theta_inv([0.0, 0.6, 0.8])
        assert ray
        np.testing.assert_allclose(d, [0.6, 0.8])

    def test_batch_inverse_flags(self):
        pts = np.vstack([theta([1.0, 2.0]), boundary_ray([1.0, 1.0])])
        _, ray = theta_inv(pts)
        assert ray.tolist() == [False, True]
        assert is_ray(pts).tolist() == [False, True]

    @settings(max_examples=300, deadline=None)
    @given(arrays(float, st.integers(1, 6), elements=finite))
    def test_roundtrip(self, x):
        p = theta(x)
        assert is_compact_point(p)
        back, ray = theta_inv(p)
        assert not ray
        np.testing.assert_allclose(back, x, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 6])
    def test_roundtrip_report(self, n):
        assert roundtrip_errors(n, 2000, seed=n)["max_error"] < 1e-12


class TestAffine:
    def test_translation_fixes_ray(self):
        p = affine_extend(np.eye(2), np.array([5.0, 0.0]), [0.0, 0.0, 1.0])
        np.testing.assert_array_equal(p, [0.0, 0.0, 1.0])

    def test_interior_points(self, rng):
        A = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        V = rng.standard_normal(3)
        x = rng.standard_normal(3)
        np.testing.assert_allclose(affine_extend(A, V, theta(x)), theta(A @ x + V), atol=1e-14)

    def test_rays_go_to_image_direction(self, rng):
        A = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        d = rng.standard_normal(3)
        img = affine_extend(A, rng.standard_normal(3), boundary_ray(d))
        np.testing.assert_allclose(img, boundary_ray(A @ d), atol=1e-15)

    def test_singular(self):
        with pytest.raises(SingularMap):
            affine_extend(np.zeros((2, 2)), np.zeros(2), theta([1.0, 1.0]))


class TestOnePoint:
    @pytest.mark.parametrize("alpha, y, expected", [
        (math.pi / 2, [1.0], [-1.0, 0.0]),
        (0.0, [1.0], [1.0, 0.0]),
        (math.pi / 4, [1.0, 0.0], [0.0, 1.0, 0.0]),
    ])
    def test_examples(self, alpha, y, expected):
        np.testing.assert_allclose(onepoint_psi(alpha, y), expected, atol=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            onepoint_psi(2.0, [1.0])

    def test_theta_x_is_shifted_theta(self, rng):
        x = rng.standard_normal(3)
        q = theta_x(x)
        np.testing.assert_allclose(q + np.array([1.0, 0, 0, 0]), theta(x))
        # q lies on the unit sphere around the south pole (-1, 0)
        assert np.linalg.norm(q + np.array([1.0, 0, 0, 0])) == pytest.approx(1.0)

    def test_composite_with_stereographic_is_identity(self, rng):
        # psi followed by stereographic projection returns tan(alpha) y = x
        for _ in range(20):
            x = rng.standard_normal(3) * 10 ** rng.uniform(-2, 2)
            np.testing.assert_allclose(stereographic(onepoint_psi_from_theta_x(theta_x(x))), x, rtol=1e-10)


class TestStereographic:
    def test_equator(self):
        np.testing.assert_allclose(stereographic([0.0, 1.0, 0.0]), [1.0, 0.0])

    def test_north_pole(self):
        np.testing.assert_allclose(stereographic([1.0, 0.0]), [0.0])

    def test_pole(self):
        with pytest.raises(PoleError):
            stereographic([-1.0, 0.0])

    def test_sphere_roundtrip(self, rng):
        p = rng.standard_normal((1000, 4))
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        np.testing.assert_allclose(stereographic_inv(stereographic(p)), p, atol=1e-12)


class TestDepth:
    @pytest.mark.parametrize("k, coords, depth", [
        (2, (0.0, 0.0, 5.0), 2),
        (2, (0.3, 1.0, 5.0), 0),
        (1, (0.0, 1.0, 2.0, 3.0), 1),
    ])
    def test_examples(self, k, coords, depth):
        assert boundary_depth(ModelChartPoint(k, coords)) == depth

    def test_rejects_negative_corner(self):
        with pytest.raises(DomainError):
            ModelChartPoint(1, (-0.1, 0.0))
