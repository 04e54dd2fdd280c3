import math
import unittest

import numpy as np

from src.errors import (
    DomainError,
    EvaluationError,
    SingularityError,
    UnsupportedDimensionError,
    UnsupportedOrderError,
    UnsupportedTargetError,
)
from src.geometry import (
    Interval,
    ModelSpace,
    adaptive_quadrature,
    builtin_warping,
    custom_warping,
    flat_warping,
    hyperbolic_warping,
    quadrature,
    quadrature_nodes,
    radial_curvature,
    space_form_curvature,
    sphere_volume,
    spherical_warping,
    target_scalar_curvature,
    warp_eval,
)


class TestWarpings(unittest.TestCase):
    """Test cases for warping functions and model spaces"""

    def test_builtin_values(self):
        """Built-in warpings evaluate f and its derivatives"""
        self.assertEqual(warp_eval(flat_warping(), 2.5, 0), 2.5)
        self.assertEqual(warp_eval(flat_warping(), 2.5, 1), 1.0)
        self.assertAlmostEqual(warp_eval(spherical_warping(), math.pi / 2, 0), 1.0, places=15)
        self.assertAlmostEqual(warp_eval(hyperbolic_warping(), 1.0, 2), math.sinh(1.0), places=15)

    def test_order_and_domain_checks(self):
        """Orders above 3 and radii outside the domain are rejected"""
        with self.assertRaises(UnsupportedOrderError):
            warp_eval(flat_warping(), 1.0, 4)
        with self.assertRaises(DomainError):
            warp_eval(spherical_warping(), 4.0, 0)
        with self.assertRaises(DomainError):
            builtin_warping('elliptic')

    def test_radial_curvature(self):
        """K = -f''/f is 1, 0, -1 on the space forms"""
        self.assertAlmostEqual(radial_curvature(spherical_warping(), 1.0), 1.0, places=14)
        self.assertEqual(radial_curvature(flat_warping(), 1.0), 0.0)
        self.assertAlmostEqual(radial_curvature(hyperbolic_warping(), 1.0), -1.0, places=14)
        with self.assertRaises(DomainError):
            radial_curvature(flat_warping(), 0.0)
        zero_at_one = custom_warping(
            (lambda r: r * (1 - r), lambda r: 1 - 2 * r, lambda r: -2.0, lambda r: 0.0)
        )
        with self.assertRaises(SingularityError):
            radial_curvature(zero_at_one, 1.0)

    def test_space_form_curvature(self):
        """Built-in kinds map to their constant curvature"""
        self.assertEqual(space_form_curvature(flat_warping()), 0.0)
        self.assertEqual(space_form_curvature(spherical_warping()), 1.0)
        self.assertEqual(space_form_curvature(hyperbolic_warping()), -1.0)
        custom = custom_warping((math.sin, math.cos, lambda r: -math.sin(r), lambda r: -math.cos(r)))
        with self.assertRaises(UnsupportedTargetError):
            space_form_curvature(custom)

    def test_custom_pole_check(self):
        """Custom warpings must satisfy f(0)=0, f'(0)=1 unless the check is off"""
        doubled = (lambda r: 2 * r, lambda r: 2.0, lambda r: 0.0, lambda r: 0.0)
        with self.assertRaises(DomainError):
            custom_warping(doubled)
        warping = custom_warping(doubled, check_pole=False)
        self.assertEqual(warping.evaluate(1.5, 0), 3.0)
        self.assertEqual(warping.kind, 'custom')

    def test_model_dimension(self):
        """Model spaces need an integer dimension >= 2"""
        with self.assertRaises(DomainError):
            ModelSpace(1, flat_warping())
        self.assertEqual(ModelSpace(4, flat_warping()).dimension, 4)

    def test_target_scalar_curvature(self):
        """Scalar curvature of the 4-dimensional space forms is 12, 0, -12"""
        self.assertAlmostEqual(target_scalar_curvature(ModelSpace(4, spherical_warping()), 1.0), 12.0, places=10)
        self.assertAlmostEqual(target_scalar_curvature(ModelSpace(4, flat_warping()), 1.0), 0.0, places=12)
        self.assertAlmostEqual(target_scalar_curvature(ModelSpace(4, hyperbolic_warping()), 0.7), -12.0, places=10)
        with self.assertRaises(UnsupportedDimensionError):
            target_scalar_curvature(ModelSpace(3, flat_warping()), 1.0)


    def test_curvature_on_grid(self):
        """K is constant 0, 1, -1 across 100 interior radii"""
        cases = (
            (flat_warping(), 0.0, (0.01, 5.0)),
            (spherical_warping(), 1.0, (0.01, math.pi - 0.01)),
            (hyperbolic_warping(), -1.0, (0.01, 5.0)),
        )
        for warping, expected, (a, b) in cases:
            for r in np.linspace(a, b, 100):
                self.assertLessEqual(abs(radial_curvature(warping, float(r)) - expected), 1e-10)

    def test_custom_cubic_curvature(self):
        """f = r + r^3 has K(1) = -6/2 = -3"""
        cubic = custom_warping(
            (lambda r: r + r ** 3, lambda r: 1 + 3 * r ** 2, lambda r: 6.0 * r, lambda r: 6.0)
        )
        self.assertAlmostEqual(radial_curvature(cubic, 1.0), -3.0, places=14)

    def test_derivative_consistency(self):
        """Central differences of each order reproduce the next one"""
        step = 1e-5
        cases = (
            (flat_warping(), (0.1, 3.0)),
            (spherical_warping(), (0.1, math.pi - 0.1)),
            (hyperbolic_warping(), (0.1, 3.0)),
        )
        for warping, (a, b) in cases:
            for r in np.linspace(a, b, 50):
                r = float(r)
                for order in (0, 1, 2):
                    difference = (warp_eval(warping, r + step, order) - warp_eval(warping, r - step, order)) / (2 * step)
                    exact = warp_eval(warping, r, order + 1)
                    self.assertLessEqual(abs(difference - exact), 1e-6 * max(1.0, abs(exact)))

    def test_scalar_curvature_on_grid(self):
        """Scalar curvature of the 4-dimensional space forms is 12 K everywhere"""
        cases = (
            (flat_warping(), 0.0, (0.1, 3.0)),
            (spherical_warping(), 1.0, (0.1, math.pi - 0.1)),
            (hyperbolic_warping(), -1.0, (0.1, 3.0)),
        )
        for warping, curvature, (a, b) in cases:
            model = ModelSpace(4, warping)
            for rho in np.linspace(a, b, 100):
                self.assertLessEqual(abs(target_scalar_curvature(model, float(rho)) - 12.0 * curvature), 1e-9)
        self.assertAlmostEqual(target_scalar_curvature(ModelSpace(4, spherical_warping()), math.pi / 3), 12.0, places=12)


class TestIntervals(unittest.TestCase):
    """Test cases for the Interval helper"""

    def test_contains_and_describe(self):
        """Open ends exclude their bound"""
        half_open = Interval(0.0, 1.0, True, False)
        self.assertTrue(half_open.contains(0.0))
        self.assertFalse(half_open.contains(1.0))
        self.assertFalse(half_open.contains(float('nan')))
        self.assertEqual(half_open.describe(), "[0,1)")
        self.assertEqual(str(Interval(0.0, math.inf, True, True)), "[0,inf)")

    def test_intersect(self):
        """Intersections keep the tighter bound and its closedness"""
        result = Interval(0.0, 2.0).intersect(Interval(0.5, 1.0, False, False))
        self.assertEqual(result, Interval(0.5, 1.0, False, False))


class TestQuadrature(unittest.TestCase):
    """Test cases for sphere volumes and Gauss-Legendre quadrature"""

    def test_sphere_volume(self):
        """Vol(S^1)=2pi, Vol(S^2)=4pi, Vol(S^3)=2pi^2"""
        self.assertAlmostEqual(sphere_volume(1), 2 * math.pi, places=13)
        self.assertAlmostEqual(sphere_volume(2), 4 * math.pi, places=13)
        self.assertAlmostEqual(sphere_volume(3), 2 * math.pi ** 2, places=12)
        self.assertAlmostEqual(sphere_volume(4), 8 * math.pi ** 2 / 3, places=12)
        with self.assertRaises(DomainError):
            sphere_volume(0)

    def test_exact_for_degree_nine(self):
        """Five nodes per panel integrate x^9 exactly"""
        self.assertAlmostEqual(quadrature(lambda x: x ** 9, 0.0, 1.0, 1), 0.1, places=15)
        self.assertAlmostEqual(quadrature(lambda x: x ** 3, 1.0, 2.0, 3), 3.75, places=14)

    def test_empty_and_invalid_intervals(self):
        """a == b gives zero; a > b and panels < 1 are rejected"""
        self.assertEqual(quadrature(math.exp, 1.0, 1.0, 4), 0.0)
        with self.assertRaises(DomainError):
            quadrature(math.exp, 2.0, 1.0, 4)
        with self.assertRaises(DomainError):
            quadrature(math.exp, 0.0, 1.0, 0)

    def test_non_finite_sample(self):
        """A NaN integrand value reports its abscissa"""
        with self.assertRaises(EvaluationError) as ctx:
            quadrature(lambda x: float('nan'), 0.0, 1.0, 2)
        self.assertIsNotNone(ctx.exception.abscissa)
        self.assertTrue(0.0 < ctx.exception.abscissa < 1.0)

    def test_nodes_match_rule(self):
        """The node/weight form reproduces the composite rule"""
        nodes, weights = quadrature_nodes(0.5, 2.0, 8)
        self.assertEqual(len(nodes), 40)
        total = sum(w * math.cos(x) for x, w in zip(nodes, weights))
        self.assertAlmostEqual(total, quadrature(math.cos, 0.5, 2.0, 8), places=14)

    def test_adaptive(self):
        """Adaptive doubling reaches the exact value"""
        self.assertAlmostEqual(adaptive_quadrature(math.exp, 0.0, 1.0), math.e - 1.0, places=12)
        self.assertAlmostEqual(adaptive_quadrature(lambda r: 16 * r ** -3, 1.0, 2.0), 6.0, places=11)

    def test_reference_integrals(self):
        """r^3 on [0,1] and sin^3 on [0,pi] hit their exact values"""
        self.assertAlmostEqual(quadrature(lambda r: r ** 3, 0.0, 1.0, 8), 0.25, places=15)
        value = quadrature(lambda r: math.sin(r) ** 3, 0.0, math.pi, 16)
        self.assertLessEqual(abs(value - 4.0 / 3.0), 1e-12)
        self.assertEqual(quadrature(lambda r: 1.0, 2.0, 2.0, 1), 0.0)

    def test_convergence_order(self):
        """Halving the panels cuts the error by at least 2^6"""
        exact = (math.exp(10.0) - 1.0) / 5.0
        errors = [abs(quadrature(lambda r: math.exp(5.0 * r), 0.0, 2.0, panels) - exact) for panels in (2, 4, 8)]
        for coarse, fine in zip(errors, errors[1:]):
            self.assertGreater(fine, 0.0)
            self.assertGreaterEqual(math.log2(coarse / fine), 6.0)


if __name__ == "__main__":
    unittest.main()
