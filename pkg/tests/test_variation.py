import math
import unittest

import numpy as np
from numpy.polynomial import Polynomial

from src.closed_forms import classification_map
from src.errors import NotApplicableError, PreconditionError, SpectralError
from src.geometry import Interval, ModelSpace, flat_warping, spherical_warping
from src.profiles import EquivariantMap, LatitudeMap, eigenmap_catalog, make_polynomial_profile
from src.tension import tension_profile
from src.variation import (
    TERM_NAMES,
    VariationField,
    assemble_hessian,
    bienergy,
    bump_field,
    divergence_identity_check,
    energy,
    hessian_fd_oracle,
    hessian_form,
    jacobi_eigenvalues,
    polynomial_profile,
    radial_jacobi,
    stability_index,
    tau_variation_value,
    zero_field,
)

PI2 = math.pi ** 2


def flat_map(terms):
    model = ModelSpace(4, flat_warping())
    return EquivariantMap(model, model, eigenmap_catalog("identity(3)"), make_polynomial_profile(terms))


def hopf_latitude(rho0=math.pi / 4):
    return LatitudeMap(3, eigenmap_catalog("hopf"), rho0, ModelSpace(3, spherical_warping()), name='hopf')


def close(a, b, rel):
    return abs(a - b) <= rel * (1.0 + abs(a))


class TestJacobiOperator(unittest.TestCase):
    """Test cases for the radial Jacobi operator"""

    def test_constant_field(self):
        """Inversion, v=1 at r=1 gives -3"""
        self.assertAlmostEqual(radial_jacobi(classification_map('inversion'), VariationField.uniform(1.0), 1.0),
                               -3.0, places=14)

    def test_identity_kernel(self):
        """v=r is in the kernel for the identity map"""
        identity = flat_map([(1.0, 1.0, False)])
        v = VariationField.radial(polynomial_profile(Polynomial([0.0, 1.0]), Interval(0.5, 2.0)))
        self.assertAlmostEqual(radial_jacobi(identity, v, 1.0), 0.0, places=14)

    def test_tension_is_jacobi_field(self):
        """L F = 0 for a biharmonic map"""
        for name in ('inversion', 'stereographic'):
            phi = classification_map(name)
            v = VariationField.radial(tension_profile(phi))
            for r in (0.7, 1.3):
                self.assertLess(abs(radial_jacobi(phi, v, r)), 1e-5, name)


class TestEnergies(unittest.TestCase):
    """Test cases for the energy and the bienergy"""

    def test_inversion_bienergy(self):
        """Inversion on [1,2] has bienergy 6 pi^2"""
        self.assertAlmostEqual(bienergy(classification_map('inversion'), 1.0, 2.0), 6.0 * PI2, places=9)
        self.assertAlmostEqual(bienergy(classification_map('inversion'), 1.0, 2.0, panels=64), 6.0 * PI2, places=9)

    def test_harmonic_bienergy(self):
        """Harmonic maps have zero bienergy"""
        self.assertAlmostEqual(bienergy(flat_map([(1.0, 1.0, False)]), 1.0, 2.0, panels=8), 0.0, places=20)

    def test_latitude_bienergy(self):
        """Hopf latitude at pi/4 has bienergy 16 pi^2"""
        self.assertAlmostEqual(bienergy(hopf_latitude()), 16.0 * PI2, places=10)

    def test_energy(self):
        """Identity on [1,2] has energy 15 pi^2; a constant profile 4.5 pi^2 rho0^2"""
        self.assertAlmostEqual(energy(flat_map([(1.0, 1.0, False)]), 1.0, 2.0), 15.0 * PI2, places=9)
        self.assertAlmostEqual(energy(flat_map([(0.5, 0.0, False)]), 1.0, 2.0), 4.5 * PI2 * 0.25, places=10)


class TestHessian(unittest.TestCase):
    """Test cases for the second variation and its finite-difference oracle"""

    def setUp(self):
        self.benchmarks = [
            (classification_map('inversion'), 1.0, 2.0),
            (classification_map('stereographic'), 0.5, 2.0),
            (classification_map('hyperbolic'), 0.1, 0.9),
        ]

    def test_flat_target_is_square(self):
        """With c=0 only the Jacobi integral survives and Q >= 0"""
        report = hessian_form(classification_map('inversion'), bump_field(1.0, 2.0), 1.0, 2.0)
        self.assertEqual(report.curvature, 0.0)
        self.assertGreater(report.value, 0.0)
        self.assertEqual(report.value, report.terms['jacobi'])

    def test_matches_oracle(self):
        """Q agrees with the finite-difference second derivative of the bienergy"""
        for phi, a, b in self.benchmarks:
            v = bump_field(a, b)
            q = hessian_form(phi, v, a, b).value
            oracle = hessian_fd_oracle(phi, v, a, b)
            self.assertTrue(close(q, oracle, 1e-3), f"{phi.name}: {q} vs {oracle}")

    def test_random_bumps(self):
        """Random polynomial bumps on every benchmark and constant fields on the latitude map"""
        rng = np.random.default_rng(11)
        for phi, a, b in self.benchmarks:
            for _ in range(5):
                v = bump_field(a, b, rng.uniform(-1.0, 1.0, size=3))
                q = hessian_form(phi, v, a, b).value
                oracle = hessian_fd_oracle(phi, v, a, b)
                self.assertTrue(close(q, oracle, 1e-3), f"{phi.name}: {q} vs {oracle}")
        latitude = hopf_latitude()
        for value in rng.uniform(-2.0, 2.0, size=5):
            v = VariationField.uniform(float(value))
            q = hessian_form(latitude, v).value
            self.assertTrue(close(q, hessian_fd_oracle(latitude, v), 1e-5))
            self.assertAlmostEqual(q, -128.0 * PI2 * value ** 2, delta=1e-8 * 128 * PI2)

    def test_harmonic_oracle(self):
        """For the identity map the oracle reproduces the Jacobi integral"""
        identity = flat_map([(1.0, 1.0, False)])
        v = bump_field(1.0, 2.0)
        q = hessian_form(identity, v, 1.0, 2.0).value
        self.assertTrue(close(q, hessian_fd_oracle(identity, v, 1.0, 2.0), 1e-4))
        self.assertEqual(hessian_fd_oracle(identity, zero_field(1.0, 2.0), 1.0, 2.0), 0.0)

    def test_bookkeeping(self):
        """The value is the Jacobi integral minus c times the signed curvature terms"""
        report = hessian_form(classification_map('stereographic'), bump_field(0.5, 2.0, (1.0, -0.3)), 0.5, 2.0)
        t = report.terms
        self.assertEqual(set(t), set(TERM_NAMES))
        combined = t['jacobi'] - (t['tension_sq'] - t['divergence'] - t['trace'] + t['gradient'])
        self.assertAlmostEqual(report.value, combined, delta=1e-12 * (1 + abs(combined)))
        self.assertEqual(report.to_dict()['quadrature_panels'], 128)

    def test_preconditions(self):
        """Non-biharmonic maps and unsupported fields are refused"""
        perturbed = flat_map([(1.0, -1.0, False), (0.01, 2.0, False)])
        with self.assertRaises(PreconditionError):
            hessian_form(perturbed, bump_field(0.5, 2.0), 0.5, 2.0)
        unsupported = VariationField.radial(polynomial_profile(Polynomial([0.0, 0.0, 1.0]), Interval(0.5, 2.0)))
        with self.assertRaises(PreconditionError):
            hessian_form(classification_map('inversion'), unsupported, 0.5, 2.0)
        with self.assertRaises(NotApplicableError):
            hessian_form(hopf_latitude(), bump_field(0.5, 2.0))

    def test_latitude_constant_variation(self):
        """Hopf latitude: Q(1) = -128 pi^2, also from the oracle in rho0"""
        report = hessian_form(hopf_latitude(), VariationField.uniform(1.0))
        self.assertAlmostEqual(report.value, -128.0 * PI2, delta=1e-9 * 128 * PI2)
        oracle = hessian_fd_oracle(hopf_latitude(), VariationField.uniform(1.0))
        self.assertTrue(close(report.value, oracle, 1e-5))


class TestTauVariation(unittest.TestCase):
    """Test cases for the variation along the tension field"""

    def test_hopf_latitude(self):
        """-2048 pi^2, matching Q(F) on the constant variation"""
        value = tau_variation_value(hopf_latitude())
        self.assertAlmostEqual(value, -2048.0 * PI2, delta=1e-8 * 2048 * PI2)
        direct = hessian_form(hopf_latitude(), VariationField.uniform(-4.0)).value
        self.assertAlmostEqual(direct, value, delta=1e-6 * abs(value))

    def test_identity_latitude(self):
        """Identity eigenmap on S^3 into S^4 at pi/4 gives -40.5 pi^2"""
        latitude = LatitudeMap(3, eigenmap_catalog("identity(3)"), math.pi / 4, ModelSpace(4, spherical_warping()))
        self.assertAlmostEqual(tau_variation_value(latitude), -40.5 * PI2, delta=1e-9 * 40.5 * PI2)

    def test_needs_closed_domain(self):
        """Flat domains are refused"""
        with self.assertRaises(PreconditionError):
            tau_variation_value(classification_map('inversion'))

    def test_divergence_identity(self):
        """The divergence identity holds for every map"""
        maps = [classification_map('inversion'), classification_map('stereographic'),
                flat_map([(1.0, 2.0, False)])]
        for phi in maps:
            for r in np.linspace(0.5, 2.0, 64):
                self.assertLess(abs(divergence_identity_check(phi, float(r))), 1e-10)


class TestStabilityIndex(unittest.TestCase):
    """Test cases for the radial index"""

    def test_hopf_latitude_unstable(self):
        """The 1x1 form of the Hopf latitude map has one negative eigenvalue"""
        report = stability_index(hopf_latitude())
        self.assertEqual(report.dimension, 1)
        self.assertGreaterEqual(report.negative_count, 1)

    def test_flat_targets_stable(self):
        """Identity and inversion have no negative modes at n=32 and n=64"""
        for phi in (flat_map([(1.0, 1.0, False)]), classification_map('inversion')):
            for n in (32, 64):
                report = stability_index(phi, 1.0, 2.0, n)
                self.assertEqual(report.negative_count, 0)
                self.assertGreaterEqual(min(report.eigenvalues), -1e-8)
                self.assertEqual(report.dimension, 2 * n)
                self.assertEqual(len(report.eigenvalues), 10)

    def test_symmetric_assembly(self):
        """The assembled form is symmetric"""
        matrix = assemble_hessian(classification_map('stereographic'), 0.5, 2.0, 16)
        self.assertLessEqual(float(np.max(np.abs(matrix - matrix.T))), 1e-12)

    def test_nested_intervals(self):
        """Shrinking the interval never adds negative modes"""
        phi = classification_map('stereographic')
        outer = stability_index(phi, 0.5, 2.0, 29, tol_index=1e-6)
        inner = stability_index(phi, 0.75, 1.75, 19, tol_index=1e-6)
        self.assertGreaterEqual(outer.negative_count, inner.negative_count)

    def test_jacobi_eigenvalues(self):
        """Cyclic Jacobi agrees with LAPACK"""
        rng = np.random.default_rng(3)
        raw = rng.normal(size=(8, 8))
        matrix = raw + raw.T
        np.testing.assert_allclose(jacobi_eigenvalues(matrix), np.linalg.eigvalsh(matrix), atol=1e-10)
        with self.assertRaises(SpectralError):
            jacobi_eigenvalues(matrix, max_sweeps=0)

    def test_graded_matrices(self):
        """Badly scaled matrices still converge to the LAPACK spectrum"""
        rng = np.random.default_rng(5)
        raw = rng.normal(size=(64, 64))
        scale = np.diag(np.logspace(0.0, 9.0, 64))
        matrix = scale @ (raw + raw.T) @ scale
        expected = np.linalg.eigvalsh(matrix)
        values = jacobi_eigenvalues(matrix)
        self.assertEqual(len(values), 64)
        np.testing.assert_allclose(values, expected, rtol=0, atol=1e-10 * float(np.max(np.abs(expected))))

        small = np.diag([1e9, 1.0, 1e-6])
        small[0, 2] = small[2, 0] = 1e-2
        values = jacobi_eigenvalues(small)
        self.assertAlmostEqual(values[0], 1e-6 - 1e-13, delta=1e-15)
        self.assertAlmostEqual(values[2], 1e9, delta=1e-6)

    def test_report_rows(self):
        """CSV rows are (i, eigenvalue)"""
        report = stability_index(classification_map('inversion'), 1.0, 2.0, 16)
        rows = report.csv_rows()
        self.assertEqual(rows[0][0], 0)
        self.assertEqual(report.to_dict()['label'], 'index over radial variations')


if __name__ == "__main__":
    unittest.main()
