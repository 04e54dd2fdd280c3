import math
import unittest

from src.closed_forms import biharmonic_family, classification_map
from src.errors import DomainError, EvaluationError, NotApplicableError, RangeError, SingularityError, StencilError
from src.geometry import ModelSpace, custom_warping, flat_warping, spherical_warping
from src.profiles import (
    EquivariantMap,
    LatitudeMap,
    eigenmap_catalog,
    function_profile,
    make_polynomial_profile,
)
from src.tension import (
    HARMONIC,
    NEITHER,
    PROPER_BIHARMONIC,
    Tolerances,
    bitension_residual,
    bitension_residual_alt,
    classify,
    conformality_residual,
    latitude_residuals,
    radial_laplacian,
    residual_report,
    tension_F,
    tension_profile,
)


def flat_identity_map(profile, m=4):
    model = ModelSpace(m, flat_warping())
    return EquivariantMap(model, model, eigenmap_catalog(f"identity({m - 1})"), profile)


class TestTension(unittest.TestCase):
    """Test cases for the tension field and the radial Laplacian"""

    def setUp(self):
        self.inversion = classification_map('inversion')

    def test_inversion_tension(self):
        """The inversion has F = -4/r^3"""
        self.assertAlmostEqual(tension_F(self.inversion, 0.5), -32.0, places=11)
        self.assertAlmostEqual(tension_F(self.inversion, 2.0), -0.5, places=13)

    def test_radial_laplacian(self):
        """Lap r^2 = 2m on R^m"""
        alpha = make_polynomial_profile([(1.0, 2.0, False)])
        self.assertAlmostEqual(radial_laplacian(ModelSpace(4, flat_warping()), alpha, 1.3), 8.0, places=12)

    def test_identity_is_harmonic(self):
        """rho = r on R^4 has zero tension"""
        phi = flat_identity_map(make_polynomial_profile([(1.0, 1.0, False)]))
        self.assertAlmostEqual(tension_F(phi, 0.7), 0.0, places=13)

    def test_pole_is_singular(self):
        """Evaluating at the pole of the domain raises"""
        with self.assertRaises((SingularityError, DomainError)):
            tension_F(self.inversion, 0.0)

    def test_hopf_sphere_system(self):
        """S^4 -> S^3 through the Hopf eigenmap, rho = r: F(pi/3) = -5 sqrt(3)/3"""
        phi = EquivariantMap(ModelSpace(4, spherical_warping()), ModelSpace(3, spherical_warping()),
                             eigenmap_catalog("hopf"), make_polynomial_profile([(1.0, 1.0, False)]))
        self.assertAlmostEqual(tension_F(phi, math.pi / 3), -5.0 * math.sqrt(3.0) / 3.0, places=12)

    def test_tension_profile(self):
        """The tension profile carries F and its derivatives"""
        profile = tension_profile(self.inversion)
        self.assertEqual(profile.max_order, 2)
        self.assertAlmostEqual(profile.evaluate(0.5, 1), 192.0, places=9)


class TestBitension(unittest.TestCase):
    """Test cases for the bitension residual in both forms"""

    def test_classification_maps_are_biharmonic(self):
        """The three conformal maps have vanishing bitension"""
        for name, (a, b) in (('inversion', (0.5, 2.0)), ('stereographic', (0.5, 2.0)), ('hyperbolic', (0.25, 0.75))):
            report = residual_report(classification_map(name), a, b, 64)
            self.assertLessEqual(report.bitension_sup, 1e-6, name)
            self.assertEqual(report.verdict, PROPER_BIHARMONIC, name)
            self.assertLessEqual(report.conformal_sup, 1e-10, name)

    def test_square_profile_residual(self):
        """rho = r^2 on R^4 has F = 5 and bitension -15 at r=1 in both forms"""
        phi = flat_identity_map(make_polynomial_profile([(1.0, 2.0, False)]))
        self.assertAlmostEqual(tension_F(phi, 1.0), 5.0, places=13)
        self.assertAlmostEqual(bitension_residual(phi, 1.0), -15.0, places=12)
        self.assertAlmostEqual(bitension_residual_alt(phi, 1.0), -15.0, delta=1e-6)

    def test_perturbed_inversion_fails(self):
        """Adding 0.01 r^2 to the inversion breaks biharmonicity"""
        profile = make_polynomial_profile([(1.0, -1.0, False), (0.01, 2.0, False)])
        report = residual_report(flat_identity_map(profile), 0.5, 2.0, 64)
        self.assertGreater(report.bitension_sup, 1e-2)
        self.assertEqual(report.verdict, NEITHER)

    def test_log_branch_is_proper(self):
        """r ln r in the m=2 family is proper biharmonic"""
        profile = biharmonic_family(2, 1.0, (0.0, 1.0, 0.0, 0.0))
        phi = flat_identity_map(profile, m=2)
        report = residual_report(phi, 0.5, 2.0, 32)
        self.assertEqual(report.verdict, PROPER_BIHARMONIC)
        self.assertAlmostEqual(report.F_sup, 4.0, places=10)

    def test_both_forms_agree(self):
        """The F-form and the Laplacian form of the residual coincide"""
        for name in ('inversion', 'stereographic'):
            phi = classification_map(name)
            for r in (0.6, 1.1, 1.9):
                self.assertAlmostEqual(bitension_residual(phi, r), bitension_residual_alt(phi, r), places=9)
        profile = make_polynomial_profile([(1.0, -1.0, False), (0.01, 2.0, False)])
        phi = flat_identity_map(profile)
        self.assertAlmostEqual(bitension_residual(phi, 1.2), bitension_residual_alt(phi, 1.2), places=10)
        self.assertAlmostEqual(bitension_residual(phi, 1.2), -0.15 / 1.44, places=10)

    def test_order_two_profiles_use_differences(self):
        """Profiles without fourth derivatives still get a residual"""
        inversion = function_profile([lambda r: 1 / r, lambda r: -1 / r ** 2, lambda r: 2 / r ** 3])
        phi = flat_identity_map(inversion)
        self.assertLess(abs(bitension_residual(phi, 1.0)), 1e-5)
        self.assertLess(abs(bitension_residual_alt(phi, 1.0)), 1e-5)

    def test_stencil_leaving_domain(self):
        """Finite differences too close to the domain edge are refused"""
        profile = function_profile(
            [lambda r: 2 * math.atanh(r), lambda r: 2 / (1 - r * r), lambda r: 4 * r / (1 - r * r) ** 2],
            domain=classification_map('hyperbolic').profile.domain,
        )
        phi = EquivariantMap(ModelSpace(4, flat_warping()), classification_map('hyperbolic').target,
                             eigenmap_catalog("identity(3)"), profile)
        with self.assertRaises(StencilError):
            bitension_residual(phi, 1.0 - 1e-5)


class TestReports(unittest.TestCase):
    """Test cases for residual reports, classification and conformality"""

    def test_report_validation(self):
        """Too few points or an empty interval are rejected"""
        phi = classification_map('inversion')
        with self.assertRaises(DomainError):
            residual_report(phi, 0.5, 2.0, 7)
        with self.assertRaises(DomainError):
            residual_report(phi, 2.0, 0.5, 16)

    def test_report_rows(self):
        """CSV rows hold r, F, bitension and conformality"""
        report = residual_report(classification_map('inversion'), 0.5, 2.0, 16)
        rows = report.csv_rows()
        self.assertEqual(len(rows), 16)
        self.assertEqual(rows[0][0], 0.5)
        self.assertAlmostEqual(rows[0][1], -32.0, places=10)
        self.assertEqual(report.to_dict()['grid_n'], 16)
        self.assertAlmostEqual(report.F_sup, 32.0, places=10)

    def test_range_error_mentions_radius(self):
        """A profile leaving the target domain reports where"""
        profile = make_polynomial_profile([(2.0, 1.0, False)])
        phi = EquivariantMap(ModelSpace(4, flat_warping()), ModelSpace(4, spherical_warping()),
                             eigenmap_catalog("identity(3)"), profile)
        with self.assertRaises(RangeError) as ctx:
            residual_report(phi, 0.5, 2.0, 16)
        self.assertIn("at r=", str(ctx.exception))
        self.assertGreater(ctx.exception.radius, math.pi / 4)

    def test_error_payload_survives(self):
        """Errors raised inside the report keep their class and attributes"""
        def failing(rho):
            if rho > 1.0:
                raise EvaluationError(f"no value at rho={rho!r}", abscissa=rho)
            return rho

        warping = custom_warping([failing, lambda rho: 1.0, lambda rho: 0.0, lambda rho: 0.0])
        phi = EquivariantMap(ModelSpace(4, flat_warping()), ModelSpace(4, warping),
                             eigenmap_catalog("identity(3)"), make_polynomial_profile([(1.0, 1.0, False)]))
        with self.assertRaises(EvaluationError) as ctx:
            residual_report(phi, 0.5, 2.0, 16)
        self.assertGreater(ctx.exception.abscissa, 1.0)
        self.assertEqual(ctx.exception.radius, ctx.exception.abscissa)
        self.assertTrue(str(ctx.exception).startswith("at r="))


    def test_classify(self):
        """Harmonic wins over proper biharmonic"""
        tolerances = Tolerances()
        self.assertEqual(classify(1e-10, 1e-10, tolerances), HARMONIC)
        self.assertEqual(classify(1.0, 1e-8, tolerances), PROPER_BIHARMONIC)
        self.assertEqual(classify(1.0, 1.0, tolerances), NEITHER)

    def test_conformality(self):
        """Conformality needs a rotationally symmetric map"""
        self.assertAlmostEqual(conformality_residual(classification_map('stereographic'), 1.3), 0.0, places=14)
        model2 = ModelSpace(2, flat_warping())
        phi = EquivariantMap(model2, model2, eigenmap_catalog("power(2)"), make_polynomial_profile([(1.0, 2.0, False)]))
        with self.assertRaises(NotApplicableError):
            conformality_residual(phi, 1.0)
        self.assertIsNone(residual_report(phi, 0.5, 1.0, 8).conformal_sup)

    def test_latitude_residuals(self):
        """Hopf latitude at pi/4 has F=-4 and zero bitension"""
        latitude = LatitudeMap(3, eigenmap_catalog("hopf"), math.pi / 4, ModelSpace(3, spherical_warping()))
        F, bitension = latitude_residuals(latitude)
        self.assertAlmostEqual(F, -4.0, places=14)
        self.assertAlmostEqual(bitension, 0.0, places=13)
        off = LatitudeMap(3, eigenmap_catalog("hopf"), 0.5, ModelSpace(3, spherical_warping()))
        self.assertGreater(abs(latitude_residuals(off)[1]), 1e-3)


if __name__ == "__main__":
    unittest.main()
